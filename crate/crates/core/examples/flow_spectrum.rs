//! Spectrum of a suspension flow over the Gauss map with roof `a_1` and
//! fiber observable `log a_1`, plus the Kac and Abramov formulas for one
//! equilibrium state.
//!
//! Run with `cargo run --release --example flow_spectrum`.

use std::sync::Arc;

use emr_multifractal::cylinder::TruncationSpec;
use emr_multifractal::flow::{abramov_entropy, flow_spectrum, kac_average, SuspensionProblem};
use emr_multifractal::model::{GaussModel, SharedModel};
use emr_multifractal::potential::{digit, log_digit};
use emr_multifractal::pressure::{equilibrium_stats, Combination};
use emr_multifractal::spectrum::{uniform_grid, SolverSettings};

fn main() -> emr_multifractal::Result<()> {
    let gauss: SharedModel = Arc::new(GaussModel::new());
    let spec = TruncationSpec::new(150, 2)?;
    let problem = SuspensionProblem::new(gauss.clone(), digit(), log_digit(), spec)?;
    let (points, _) = flow_spectrum(&problem, &uniform_grid(0.02, 0.35, 9), SolverSettings::default(), 3)?;
    for p in &points {
        println!("alpha {:.4}  B {:.8}  base b {:.8}  {}", p.base.alpha, p.big_b, p.base.b, p.base.regime);
    }

    let comb = Combination::geometric(&gauss, 1.0);
    let stats = equilibrium_stats(&gauss, &comb, spec, &[digit(), log_digit()])?;
    println!("Gauss measure: flow entropy {:.6}", abramov_entropy(&stats, &digit())?);
    println!("Gauss measure: flow average {:.6}", kac_average(&stats, &log_digit(), &digit())?);
    Ok(())
}
