//! Range of Birkhoff quotients and the accumulation interval for the Gauss
//! pair `log a_1 / a_1`.
//!
//! Run with `cargo run --release --example boundaries`.

use std::sync::Arc;

use emr_multifractal::cylinder::TruncationSpec;
use emr_multifractal::model::GaussModel;
use emr_multifractal::potential::{digit, log_digit};
use emr_multifractal::spectrum::{boundary_summary, QuotientProblem};

fn main() -> emr_multifractal::Result<()> {
    let problem = QuotientProblem::new(Arc::new(GaussModel::new()), log_digit(), digit(), TruncationSpec::new(2000, 2)?)?;
    let s = boundary_summary(&problem, 100_000)?;
    println!("alpha_m = {}", s.alpha_min);
    println!("alpha_M = {:.12} (ln 3 / 3 = {:.12})", s.alpha_max, 3f64.ln() / 3.0);
    match s.accumulation_interval() {
        Some((lo, hi)) => println!("accumulation interval [{lo:e}, {hi:e}]"),
        None => println!("no accumulation interval"),
    }
    Ok(())
}
