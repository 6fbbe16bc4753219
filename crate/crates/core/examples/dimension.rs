//! Bowen roots of truncated Gauss and Manneville-Pomeau repellers and the
//! abscissa of convergence of their full systems.
//!
//! Run with `cargo run --release --example dimension`.

use std::sync::Arc;

use emr_multifractal::cylinder::TruncationSpec;
use emr_multifractal::model::{model_from_id, GaussModel, SharedModel};
use emr_multifractal::pressure::{bowen_dimension, s_infinity};

fn main() -> emr_multifractal::Result<()> {
    let gauss: SharedModel = Arc::new(GaussModel::new());
    // continued fractions with digits 1 and 2 only
    for k in [4, 8, 10] {
        println!("digits {{1,2}}, depth {k:>2}: {:.10}", bowen_dimension(&gauss, TruncationSpec::new(2, k)?, 1e-13)?);
    }
    for n in [10, 100, 1000] {
        println!("gauss n = {n:>5}: {:.10}", bowen_dimension(&gauss, TruncationSpec::new(n, 2)?, 1e-13)?);
    }
    println!("gauss s_inf = {:.6}", s_infinity(&gauss)?);

    let mp = model_from_id("mp:0.5")?.shared();
    for n in [50, 250] {
        println!("mp(0.5) n = {n:>4}: {:.10}", bowen_dimension(&mp, TruncationSpec::new(n, 2)?, 1e-13)?);
    }
    println!("mp(0.5) s_inf = {:.6}", s_infinity(&mp)?);
    Ok(())
}
