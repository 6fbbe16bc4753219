//! Drive a run from a TOML configuration, as the `emr-spectrum` binary does,
//! writing CSV artifacts to a directory.
//!
//! Run with `cargo run --release --example config_run -- [out_dir]`.

use std::io::stdout;
use std::path::PathBuf;

use emr_multifractal::cli::{run, Command};
use emr_multifractal::config::Config;

const CONFIG: &str = r#"
[model]
id = "gauss"

[potentials]
phi = "log-digit"
psi = "digit"

[truncation]
n = 100
k = 2

[grid]
points = 9
refine_steps = 3
"#;

fn main() -> emr_multifractal::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("emr-config-run"));
    std::fs::create_dir_all(&out)?;
    let config = Config::parse(CONFIG)?;
    config.validate()?;
    for command in [Command::Boundaries, Command::Spectrum] {
        run(command, &config, &out, &mut stdout())?;
    }
    println!("artifacts in {}", out.display());
    Ok(())
}
