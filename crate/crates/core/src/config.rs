//! Experiment configuration: a TOML file with `[model]`, `[potentials]`,
//! `[truncation]`, `[grid]` and `[tolerances]` sections. Every key has a
//! default and unknown keys are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::cylinder::{TruncationSpec, DEFAULT_WORD_BUDGET};
use crate::error::{Error, Result};
use crate::spectrum::{DiscontinuityHypotheses, SolverSettings, DEFAULT_GRID_POINTS, DISCONTINUITY_ALPHAS};
use crate::transfer::EigenSettings;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub potentials: PotentialSection,
    pub truncation: TruncationSection,
    pub grid: GridSection,
    pub tolerances: ToleranceSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            model: ModelSection::default(),
            potentials: PotentialSection::default(),
            truncation: TruncationSection::default(),
            grid: GridSection::default(),
            tolerances: ToleranceSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// `gauss`, `mp:<beta>`, `mp:<beta>:<cutoff>` or `finite:<path>`.
    pub id: String,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { id: "gauss".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSection {
    /// Numerator of the quotient.
    pub phi: String,
    /// Denominator of the quotient.
    pub psi: String,
    /// Roof function of the suspension flow.
    pub roof: String,
    /// Flow observable, constant along fibers; `Δ_g = g τ`.
    pub observable: String,
    /// Kac transform `Δ_g` given directly; overrides `observable` when set.
    pub kac: Option<String>,
    /// Coefficients of the combination evaluated by `pressure`.
    pub combination: BTreeMap<String, f64>,
    /// Hypotheses asserted for `discontinuity-probe`.
    pub hypotheses: Vec<String>,
}

impl Default for PotentialSection {
    fn default() -> Self {
        PotentialSection {
            phi: "log-digit".into(),
            psi: "digit".into(),
            roof: "digit".into(),
            observable: "log-digit".into(),
            kac: None,
            combination: BTreeMap::from([("log-derivative".to_string(), -1.0)]),
            hypotheses: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TruncationSection {
    pub n: usize,
    pub k: usize,
    pub budget: u64,
    /// Largest symbol used by finiteness probes and accumulation-point scans.
    pub probe_cutoff: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        TruncationSection { n: 2000, k: 2, budget: DEFAULT_WORD_BUDGET, probe_cutoff: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub points: usize,
    /// Explicit α values; when empty the grid spans the computed ratio range.
    pub alphas: Vec<f64>,
    /// Optional explicit range for a uniform grid.
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    /// Bisection steps locating regime changes.
    pub refine_steps: usize,
    /// α values for `discontinuity-probe`.
    pub discontinuity: Vec<f64>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            points: DEFAULT_GRID_POINTS,
            alphas: Vec::new(),
            alpha_min: None,
            alpha_max: None,
            refine_steps: 12,
            discontinuity: DISCONTINUITY_ALPHAS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub tol: f64,
    pub plateau_epsilon: Option<f64>,
    pub q_max: f64,
    pub eigen_tol: f64,
    pub vector_tol: f64,
    pub max_iter: usize,
    pub entropy_tol: f64,
    pub sinf_tol: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        let s = SolverSettings::default();
        let e = EigenSettings::default();
        ToleranceSection {
            tol: s.tol,
            plateau_epsilon: s.plateau_epsilon,
            q_max: s.q_max,
            eigen_tol: e.tol,
            vector_tol: e.vector_tol,
            max_iter: e.max_iter,
            entropy_tol: e.entropy_tol,
            sinf_tol: 1e-4,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        if !(t.tol > 0.0) || !(t.eigen_tol > 0.0) || !(t.vector_tol > 0.0) || !(t.entropy_tol > 0.0) || !(t.sinf_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if t.plateau_epsilon.is_some_and(|e| !(e > 0.0)) {
            return Err(Error::Config("plateau_epsilon must be positive".into()));
        }
        if self.truncation.probe_cutoff < 2 {
            return Err(Error::Config("probe_cutoff must be at least 2".into()));
        }
        if self.grid.alphas.iter().chain(&self.grid.discontinuity).any(|a| !a.is_finite()) {
            return Err(Error::Config("grid values must be finite".into()));
        }
        self.truncation_spec().map(|_| ())
    }

    pub fn truncation_spec(&self) -> Result<TruncationSpec> {
        Ok(TruncationSpec::new(self.truncation.n, self.truncation.k)?.with_budget(self.truncation.budget))
    }

    pub fn solver_settings(&self) -> SolverSettings {
        let t = &self.tolerances;
        SolverSettings {
            tol: t.tol,
            plateau_epsilon: t.plateau_epsilon,
            q_max: t.q_max,
            probe_cutoff: self.truncation.probe_cutoff,
            eigen: EigenSettings { tol: t.eigen_tol, vector_tol: t.vector_tol, max_iter: t.max_iter, entropy_tol: t.entropy_tol },
        }
    }

    pub fn hypotheses(&self) -> Result<DiscontinuityHypotheses> {
        let mut h = DiscontinuityHypotheses::default();
        for name in &self.potentials.hypotheses {
            match name.as_str() {
                "ratio_vanishes_at_accumulation" => h.ratio_vanishes_at_accumulation = true,
                "negative_integral_exists" => h.negative_integral_exists = true,
                "dimension_exceeds_s_infinity" => h.dimension_exceeds_s_infinity = true,
                "positive_at_maximal_measure" => h.positive_at_maximal_measure = true,
                other => return Err(Error::Config(format!("unknown hypothesis `{other}`"))),
            }
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = Config::parse(
            r#"
            [model]
            id = "mp:0.5"
            [potentials]
            phi = "induced-sum"
            psi = "return-time"
            hypotheses = ["negative_integral_exists"]
            [truncation]
            n = 250
            [grid]
            points = 9
            "#,
        )
        .unwrap();
        assert_eq!(cfg.model.id, "mp:0.5");
        assert_eq!(cfg.truncation.n, 250);
        assert_eq!(cfg.truncation.k, 2);
        assert_eq!(cfg.grid.points, 9);
        assert!(cfg.hypotheses().unwrap().negative_integral_exists);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(matches!(Config::parse("[model]\nname = \"gauss\""), Err(Error::Config(_))));
        assert!(matches!(Config::parse("[extras]\nx = 1"), Err(Error::Config(_))));
        assert!(matches!(Config::parse("[tolerances]\ntol = -1.0"), Err(Error::Config(_))));
    }
}
