//! Spectrum of the quotient `log a_1 / a_1` for the Gauss map, classified
//! into regimes.
//!
//! Run with `cargo run --release --example gauss_spectrum`.

use std::sync::Arc;

use emr_multifractal::cylinder::TruncationSpec;
use emr_multifractal::model::GaussModel;
use emr_multifractal::potential::{digit, log_digit};
use emr_multifractal::spectrum::{classify_regimes, uniform_grid, QuotientProblem, SolverSettings};

fn main() -> emr_multifractal::Result<()> {
    let problem = QuotientProblem::new(Arc::new(GaussModel::new()), log_digit(), digit(), TruncationSpec::new(300, 2)?)?;
    let report = classify_regimes(&problem, &uniform_grid(0.01, 0.36, 15), SolverSettings::default(), 6)?;
    println!("truncated dimension {:.8}", report.dimension);
    println!("{:>8} {:>12} {:>10} regime", "alpha", "b", "q_c");
    for p in &report.points {
        let q = p.q_c.map(|q| format!("{q:.5}")).unwrap_or_default();
        println!("{:>8.4} {:>12.8} {q:>10} {}", p.alpha, p.b, p.regime);
    }
    for i in &report.intervals {
        println!("{} on [{:.4}, {:.4}]", i.regime, i.lo, i.hi);
    }
    Ok(())
}
