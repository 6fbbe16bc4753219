//! Induced Manneville-Pomeau map: the plateau of the spectrum below the
//! equilibrium ratio of the measure of maximal dimension, and the jump of
//! `b` at zero.
//!
//! Run with `cargo run --release --example manneville_pomeau`.

use emr_multifractal::cylinder::TruncationSpec;
use emr_multifractal::model::model_from_id;
use emr_multifractal::potential::potential_by_name;
use emr_multifractal::spectrum::{
    classify_regimes, discontinuity_probe, uniform_grid, DiscontinuityHypotheses, QuotientProblem, SolverSettings, DISCONTINUITY_ALPHAS,
};

fn main() -> emr_multifractal::Result<()> {
    let mp = model_from_id("mp:0.5")?;
    let phi = potential_by_name(&mp, "induced-sum")?;
    let psi = potential_by_name(&mp, "return-time")?;
    let problem = QuotientProblem::new(mp.shared(), phi, psi, TruncationSpec::new(120, 2)?)?;

    let report = classify_regimes(&problem, &uniform_grid(-0.1, 0.15, 11), SolverSettings::default(), 4)?;
    println!("truncated dimension {:.6}", report.dimension);
    for p in &report.points {
        println!("alpha {:>8.4}  b {:.6}  {}", p.alpha, p.b, p.regime);
    }

    // The hypotheses are properties of this pair; the acceptance run checks
    // each of them numerically.
    let probe = discontinuity_probe(&problem, DiscontinuityHypotheses::all(), &DISCONTINUITY_ALPHAS, SolverSettings::default())?;
    println!("sup b near 0 {:.6}, gap {:.4}", probe.sup_b.unwrap_or(f64::NAN), probe.gap.unwrap_or(f64::NAN));
    Ok(())
}
