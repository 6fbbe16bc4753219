//! Pressure of `-s log|T'|` on Gauss truncations, with the equilibrium
//! entropy and Lyapunov exponent.
//!
//! Run with `cargo run --release --example pressure`.

use std::sync::Arc;

use emr_multifractal::cylinder::TruncationSpec;
use emr_multifractal::model::{GaussModel, SharedModel};
use emr_multifractal::pressure::{equilibrium_stats, pressure, Combination};

fn main() -> emr_multifractal::Result<()> {
    let gauss: SharedModel = Arc::new(GaussModel::new());
    println!("{:>6} {:>5} {:>14} {:>12} {:>12}", "n", "s", "P", "h", "lambda");
    for n in [10, 100, 1000] {
        let spec = TruncationSpec::new(n, 2)?;
        for s in [0.75, 1.0, 1.5] {
            let comb = Combination::geometric(&gauss, s);
            let p = pressure(&gauss, &comb, spec)?;
            let stats = equilibrium_stats(&gauss, &comb, spec, &[])?;
            println!("{n:>6} {s:>5} {:>14.9} {:>12.6} {:>12.6}", p.value, stats.entropy, stats.lyapunov);
        }
    }
    Ok(())
}
