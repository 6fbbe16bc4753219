use std::path::Path;
use std::process::{Command, Output};

use emr_multifractal::cli::{self, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK};
use emr_multifractal::config::Config;

fn emr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emr-spectrum")).args(args).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn spectrum_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[truncation]\nn = 60\n[grid]\npoints = 9\nrefine_steps = 3\n");
    let out = dir.path().join("out");
    let run = emr(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "alpha,b,q_c,regime,n,k,res_G1,res_dG1");
    assert_eq!(lines.len(), 10);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 8);
        assert_eq!(fields[4], "60");
        assert_eq!(fields[5], "2");
        assert_eq!(fields[2].is_empty(), fields[3] == "J2");
    }
    assert!(out.join("regimes.csv").exists());
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[truncation]\nn = 40\n[grid]\nalphas = [0.05, 0.15, 0.25, 0.33]\nrefine_steps = 2\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(emr(&["flow-spectrum", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]).status.code(), Some(EXIT_OK));
    }
    let first = std::fs::read(a.join("flow_spectrum.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("flow_spectrum.csv")).unwrap());
    let header = String::from_utf8(first).unwrap();
    assert!(header.starts_with("alpha,B,q_c,regime,n,k,res_G1,res_dG1,base_b\n"));
}

#[test]
fn dimension_prints_root_and_tail() {
    let dir = tempfile::tempdir().unwrap();
    let mut console = Vec::new();
    let mut cfg = Config::default();
    cfg.truncation.n = 2;
    cfg.truncation.k = 8;
    cli::run(cli::Command::Dimension, &cfg, dir.path(), &mut console).unwrap();
    let text = String::from_utf8(console).unwrap();
    assert!(text.contains("bowen root   0.53126"), "{text}");
    assert!(text.contains("monotone in n: yes"));
    let csv = std::fs::read_to_string(dir.path().join("dimension.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn boundaries_of_the_gauss_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut console = Vec::new();
    cli::run(cli::Command::Boundaries, &Config::default(), dir.path(), &mut console).unwrap();
    let text = String::from_utf8(console).unwrap();
    assert!(text.contains("alpha_m  0\n"), "{text}");
    assert!(text.contains("alpha_M  0.366204096"));
    let e = text.lines().find_map(|l| l.strip_prefix("E        [")).unwrap().trim_end_matches(']');
    let ends: Vec<f64> = e.split(", ").map(|v| v.parse().unwrap()).collect();
    assert!(ends.iter().all(|v| v.abs() < 1e-6), "{text}");
    assert!(text.contains(&format!("U        ({}, 0.366204096)", e.split(", ").last().unwrap())), "{text}");
}

#[test]
fn pressure_and_sinf_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[truncation]\nn = 1\nk = 30\n[potentials.combination]\nlog-derivative = -1.0\n");
    let run = emr(&["pressure", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(EXIT_OK));
    let stdout = String::from_utf8(run.stdout).unwrap();
    let golden = -2.0 * ((1.0 + 5f64.sqrt()) / 2.0).ln();
    assert!(stdout.contains(&format!("pressure     {}", emr_multifractal::report::sig9(golden))), "{stdout}");
    let run = emr(&["sinf", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8(run.stdout).unwrap().contains("s_inf  0.5"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(emr(&["spectrum", "--config", "/nonexistent.toml"]).status.code(), Some(EXIT_CONFIG));
    let cfg = write_config(dir.path(), "[grid]\nspacing = 3\n");
    assert_eq!(emr(&["spectrum", "--config", &cfg]).status.code(), Some(EXIT_CONFIG));
    let cfg = write_config(dir.path(), "[potentials]\nphi = \"nope\"\n");
    assert_eq!(emr(&["boundaries", "--config", &cfg, "--out", out]).status.code(), Some(EXIT_CONFIG));
    assert_eq!(emr(&["frobnicate"]).status.code(), Some(EXIT_CONFIG));
    // 2000^3 words is over the default budget
    assert_eq!(emr(&["dimension", "--depth", "3", "--out", out]).status.code(), Some(EXIT_NUMERICAL));
    // the probe needs its hypotheses asserted
    assert_eq!(emr(&["discontinuity-probe", "--out", out]).status.code(), Some(EXIT_CONFIG));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[truncation]\nn = 500\nk = 3\n");
    let run = emr(&["dimension", "--config", &cfg, "--n", "3", "--depth", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(EXIT_OK));
    let csv = std::fs::read_to_string(dir.path().join("dimension.csv")).unwrap();
    assert!(csv.lines().last().unwrap().starts_with("3,4,"));
}
