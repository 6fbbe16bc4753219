//! The `emr-spectrum` command line: configuration, sweeps and CSV artifacts.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::Config;
use crate::cylinder::TruncationSpec;
use crate::error::{Error, Result};
use crate::flow::{flow_spectrum, kac_transform, SuspensionProblem};
use crate::model::{model_from_id, LoadedModel};
use crate::potential::potential_by_name;
use crate::pressure::{bowen_dimension, equilibrium_stats, pressure, s_infinity_with, Combination};
use crate::report::{sig9, write_flow_csv, write_spectrum_csv, write_table};
use crate::spectrum::{boundary_summary, classify_regimes, default_grid, discontinuity_probe, uniform_grid, BoundarySummary, QuotientProblem, RegimeReport};

#[derive(Debug, Parser)]
#[command(name = "emr-spectrum", version, about = "Pressure, dimension and Birkhoff-quotient spectra of expanding Markov maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for CSV artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads for grid sweeps.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Alphabet cutoff, overriding the configuration.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Cylinder depth, overriding the configuration.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Truncated pressure of the configured combination.
    Pressure,
    /// Bowen root of the truncated repeller, with its tail in n.
    Dimension,
    /// Abscissa of convergence s_∞ of P(-s log|T'|).
    Sinf,
    /// b(α) over the α grid, with regime intervals.
    Spectrum,
    /// B(α) = b(α) + 1 for the suspension flow.
    FlowSpectrum,
    /// α_m, α_M and the accumulation interval E.
    Boundaries,
    /// b(α) at negative α against dim Λ.
    DiscontinuityProbe,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Pressure => "pressure",
            Command::Dimension => "dimension",
            Command::Sinf => "sinf",
            Command::Spectrum => "spectrum",
            Command::FlowSpectrum => "flow-spectrum",
            Command::Boundaries => "boundaries",
            Command::DiscontinuityProbe => "discontinuity-probe",
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Parse arguments, run, and map the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = prepare(&cli).and_then(|cfg| run(cli.command, &cfg, &cli.out, &mut io::stdout().lock()));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("emr-spectrum {}: {e}", cli.command.name());
            if e.is_configuration() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn prepare(cli: &Cli) -> Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(n) = cli.n {
        cfg.truncation.n = n;
    }
    if let Some(k) = cli.depth {
        cfg.truncation.k = k;
    }
    cfg.validate()?;
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        // a global pool may already exist when called repeatedly in-process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(cfg)
}

/// Run one command and write its artifacts into `out_dir`.
pub fn run(command: Command, cfg: &Config, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let loaded = model_from_id(&cfg.model.id)?;
    let spec = cfg.truncation_spec()?;
    match command {
        Command::Pressure => run_pressure(cfg, &loaded, spec, out_dir, console),
        Command::Dimension => run_dimension(cfg, &loaded, spec, out_dir, console),
        Command::Sinf => run_sinf(cfg, &loaded, out_dir, console),
        Command::Boundaries => run_boundaries(cfg, &loaded, spec, out_dir, console),
        Command::Spectrum => run_spectrum(cfg, &loaded, spec, out_dir, console),
        Command::FlowSpectrum => run_flow(cfg, &loaded, spec, out_dir, console),
        Command::DiscontinuityProbe => run_discontinuity(cfg, &loaded, spec, out_dir, console),
    }
}

fn create(out_dir: &Path, name: &str) -> Result<File> {
    Ok(File::create(out_dir.join(name))?)
}

fn quotient(cfg: &Config, loaded: &LoadedModel, spec: TruncationSpec) -> Result<QuotientProblem> {
    let phi = potential_by_name(loaded, &cfg.potentials.phi)?;
    let psi = potential_by_name(loaded, &cfg.potentials.psi)?;
    QuotientProblem::new(loaded.shared(), phi, psi, spec)
}

fn run_pressure(cfg: &Config, loaded: &LoadedModel, spec: TruncationSpec, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    let mut comb = Combination::new();
    for (name, c) in &cfg.potentials.combination {
        comb = comb.with(potential_by_name(loaded, name)?, *c);
    }
    let model = loaded.shared();
    let value = pressure(&model, &comb, spec)?;
    let terms: Vec<String> = comb.terms().iter().map(|(p, c)| format!("{} * {}", sig9(*c), p.name())).collect();
    writeln!(console, "model        {}", loaded.id())?;
    writeln!(console, "combination  {}", terms.join(" + "))?;
    writeln!(console, "n, k         {}, {}", spec.cutoff, spec.depth)?;
    writeln!(console, "pressure     {}", sig9(value.value))?;
    let mut row = vec![spec.cutoff.to_string(), spec.depth.to_string(), sig9(value.value), sig9(value.error_bound)];
    if value.is_finite() {
        writeln!(console, "error bound  {}", sig9(value.error_bound))?;
        let stats = equilibrium_stats(&model, &comb, spec, &[])?;
        writeln!(console, "entropy      {}", sig9(stats.entropy))?;
        writeln!(console, "lyapunov     {}", sig9(stats.lyapunov))?;
        row.extend([sig9(stats.entropy), sig9(stats.lyapunov)]);
    } else {
        row.extend([String::new(), String::new()]);
    }
    write_table(create(out_dir, "pressure.csv")?, &["n", "k", "pressure", "error_bound", "entropy", "lyapunov"], &[row])
}

fn run_dimension(cfg: &Config, loaded: &LoadedModel, spec: TruncationSpec, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    let model = loaded.shared();
    let top = model.alphabet().clamp(spec.cutoff);
    let mut cutoffs: Vec<usize> = (0..4).map(|j| (top >> j).max(1)).collect();
    cutoffs.sort_unstable();
    cutoffs.dedup();
    let tol = cfg.tolerances.tol;
    let mut rows = Vec::new();
    let mut values = Vec::new();
    writeln!(console, "model {}  depth {}", loaded.id(), spec.depth)?;
    writeln!(console, "{:>10}  {:>12}", "n", "dimension")?;
    for n in cutoffs {
        let d = bowen_dimension(&model, TruncationSpec::new(n, spec.depth)?.with_budget(spec.budget), tol)?;
        writeln!(console, "{n:>10}  {:>12}", sig9(d))?;
        rows.push(vec![n.to_string(), spec.depth.to_string(), sig9(d)]);
        values.push(d);
    }
    let monotone = values.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    writeln!(console, "bowen root   {}", sig9(*values.last().expect("at least one cutoff")))?;
    writeln!(console, "monotone in n: {}", if monotone { "yes" } else { "no" })?;
    write_table(create(out_dir, "dimension.csv")?, &["n", "k", "dimension"], &rows)
}

fn run_sinf(cfg: &Config, loaded: &LoadedModel, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    let s = s_infinity_with(&loaded.shared(), cfg.truncation.probe_cutoff, cfg.tolerances.sinf_tol)?;
    writeln!(console, "model  {}", loaded.id())?;
    writeln!(console, "s_inf  {}", sig9(s))?;
    write_table(create(out_dir, "sinf.csv")?, &["model", "s_inf"], &[vec![loaded.id(), sig9(s)]])
}

fn print_boundaries(summary: &BoundarySummary, console: &mut dyn Write) -> Result<()> {
    writeln!(console, "alpha_m  {}", sig9(summary.alpha_min))?;
    writeln!(console, "alpha_M  {}", sig9(summary.alpha_max))?;
    match summary.accumulation_interval() {
        Some((lo, hi)) => {
            writeln!(console, "E        [{}, {}]", sig9(lo), sig9(hi))?;
            if lo > summary.alpha_min || hi < summary.alpha_max {
                let mut parts = Vec::new();
                if lo > summary.alpha_min {
                    parts.push(format!("({}, {})", sig9(summary.alpha_min), sig9(lo)));
                }
                if hi < summary.alpha_max {
                    parts.push(format!("({}, {})", sig9(hi), sig9(summary.alpha_max)));
                }
                writeln!(console, "U        {}", parts.join(" u "))?;
            }
        }
        None => {
            writeln!(console, "E        empty")?;
            writeln!(console, "U        ({}, {})", sig9(summary.alpha_min), sig9(summary.alpha_max))?;
        }
    }
    if summary.diverges {
        writeln!(console, "branch ratios diverge at the accumulation point")?;
    }
    Ok(())
}

fn run_boundaries(cfg: &Config, loaded: &LoadedModel, spec: TruncationSpec, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    let problem = quotient(cfg, loaded, spec)?;
    let summary = boundary_summary(&problem, cfg.truncation.probe_cutoff)?;
    print_boundaries(&summary, console)?;
    let opt = |x: Option<f64>| x.map(sig9).unwrap_or_default();
    let row = vec![
        sig9(summary.alpha_min),
        sig9(summary.alpha_max),
        opt(summary.alpha_lower),
        opt(summary.alpha_upper),
        summary.diverges.to_string(),
    ];
    write_table(create(out_dir, "boundaries.csv")?, &["alpha_min", "alpha_max", "alpha_lower", "alpha_upper", "diverges"], &[row])
}

fn grid_for(cfg: &Config, problem: &QuotientProblem) -> Result<Vec<f64>> {
    let g = &cfg.grid;
    if !g.alphas.is_empty() {
        return Ok(g.alphas.clone());
    }
    if let (Some(lo), Some(hi)) = (g.alpha_min, g.alpha_max) {
        return Ok(uniform_grid(lo, hi, g.points));
    }
    let summary = boundary_summary(problem, cfg.truncation.probe_cutoff)?;
    default_grid(&summary, g.points)
}

fn print_regimes(report: &RegimeReport, console: &mut dyn Write) -> Result<()> {
    writeln!(console, "truncated dimension  {}", sig9(report.dimension))?;
    for i in &report.intervals {
        writeln!(console, "{}  [{}, {}]", i.regime, sig9(i.lo), sig9(i.hi))?;
    }
    if !report.skipped.is_empty() {
        let list: Vec<String> = report.skipped.iter().map(|(a, _)| sig9(*a)).collect();
        writeln!(console, "out of range: {}", list.join(", "))?;
    }
    if !report.plateau_is_contiguous() {
        let list: Vec<String> = report.offending.iter().map(|a| sig9(*a)).collect();
        writeln!(console, "warning: J2 tags not contiguous (truncation artifact) at {}", list.join(", "))?;
    }
    Ok(())
}

fn regime_rows(report: &RegimeReport) -> Vec<Vec<String>> {
    report.intervals.iter().map(|i| vec![i.regime.to_string(), sig9(i.lo), sig9(i.hi)]).collect()
}

fn run_spectrum(cfg: &Config, loaded: &LoadedModel, spec: TruncationSpec, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    let problem = quotient(cfg, loaded, spec)?;
    let grid = grid_for(cfg, &problem)?;
    let report = classify_regimes(&problem, &grid, cfg.solver_settings(), cfg.grid.refine_steps)?;
    write_spectrum_csv(create(out_dir, "spectrum.csv")?, &report.points)?;
    write_table(create(out_dir, "regimes.csv")?, &["regime", "lo", "hi"], &regime_rows(&report))?;
    writeln!(console, "model {}  phi {}  psi {}  n {}  k {}", loaded.id(), problem.phi.name(), problem.psi.name(), spec.cutoff, spec.depth)?;
    writeln!(console, "{} grid points, {} solved", grid.len(), report.points.len())?;
    print_regimes(&report, console)
}

fn run_flow(cfg: &Config, loaded: &LoadedModel, spec: TruncationSpec, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    let roof = potential_by_name(loaded, &cfg.potentials.roof)?;
    let kac = match &cfg.potentials.kac {
        Some(name) => potential_by_name(loaded, name)?,
        None => kac_transform(&potential_by_name(loaded, &cfg.potentials.observable)?, &roof),
    };
    let problem = SuspensionProblem::new(loaded.shared(), roof, kac, spec)?;
    let base = problem.base_problem()?;
    let grid = grid_for(cfg, &base)?;
    let (points, report) = flow_spectrum(&problem, &grid, cfg.solver_settings(), cfg.grid.refine_steps)?;
    write_flow_csv(create(out_dir, "flow_spectrum.csv")?, &points)?;
    write_table(create(out_dir, "regimes.csv")?, &["regime", "lo", "hi"], &regime_rows(&report))?;
    writeln!(console, "model {}  kac {}  roof {}  n {}  k {}", loaded.id(), problem.kac.name(), problem.roof.name(), spec.cutoff, spec.depth)?;
    writeln!(console, "{} grid points, {} solved; B = b + 1", grid.len(), points.len())?;
    print_regimes(&report, console)
}

fn run_discontinuity(cfg: &Config, loaded: &LoadedModel, spec: TruncationSpec, out_dir: &Path, console: &mut dyn Write) -> Result<()> {
    let problem = quotient(cfg, loaded, spec)?;
    let report = discontinuity_probe(&problem, cfg.hypotheses()?, &cfg.grid.discontinuity, cfg.solver_settings())?;
    let rows: Vec<Vec<String>> = report
        .points
        .iter()
        .map(|p| vec![sig9(p.alpha), sig9(p.b), p.q_c.map(sig9).unwrap_or_default(), p.regime.to_string()])
        .collect();
    write_table(create(out_dir, "discontinuity.csv")?, &["alpha", "b", "q_c", "regime"], &rows)?;
    writeln!(console, "dim (alpha = 0)  {}", sig9(report.dimension))?;
    for p in &report.points {
        writeln!(console, "b({})  {}", sig9(p.alpha), sig9(p.b))?;
    }
    if !report.out_of_range.is_empty() {
        let list: Vec<String> = report.out_of_range.iter().map(|a| sig9(*a)).collect();
        writeln!(console, "out of range: {}", list.join(", "))?;
    }
    match (report.sup_b, report.gap) {
        (Some(s), Some(g)) => {
            writeln!(console, "sup b(alpha < 0)  {}", sig9(s))?;
            writeln!(console, "gap              {}", sig9(g))?;
        }
        _ => writeln!(console, "empty probe")?,
    }
    writeln!(console, "monotone toward 0: {}", if report.monotone { "yes" } else { "no" })?;
    Ok(())
}
