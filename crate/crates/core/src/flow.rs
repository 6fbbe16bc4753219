//! Suspension semi-flows over an expanding Markov base.
//!
//! A flow observable enters only through its Kac transform `Δ_g`, the
//! integral of `g` along the fiber over `x`. Flow level sets `K(α)` then
//! correspond to base level sets of `Δ_g / τ`, and `B(α) = b(α) + 1`.

use crate::cylinder::TruncationSpec;
use crate::error::{Error, Result};
use crate::model::SharedModel;
use crate::potential::Potential;
use crate::spectrum::{classify_regimes, QuotientProblem, RegimeReport, SolverSettings, SpectrumPoint, SpectrumSolver};
use crate::transfer::EquilibriumStats;

/// `Δ_g = g τ` for an observable `g` that is constant along fibers.
pub fn kac_transform(g: &Potential, roof: &Potential) -> Potential {
    g.product(roof, format!("kac:{}*{}", g.name(), roof.name()))
}

/// A suspension flow with roof `τ` and an observable given by its Kac transform.
#[derive(Debug, Clone)]
pub struct SuspensionProblem {
    pub model: SharedModel,
    pub roof: Potential,
    pub kac: Potential,
    pub spec: TruncationSpec,
}

impl SuspensionProblem {
    /// The roof must be bounded below by some `η > 0`.
    pub fn new(model: SharedModel, roof: Potential, kac: Potential, spec: TruncationSpec) -> Result<Self> {
        if !(roof.floor() > 0.0) {
            return Err(Error::Precondition(format!("roof `{}` must be bounded below by some η > 0", roof.name())));
        }
        Ok(SuspensionProblem { model, roof, kac, spec })
    }

    /// Observable constant along fibers, `Δ_g = g τ`.
    pub fn from_fiber_constant(model: SharedModel, roof: Potential, g: &Potential, spec: TruncationSpec) -> Result<Self> {
        let kac = kac_transform(g, &roof);
        Self::new(model, roof, kac, spec)
    }

    /// The base quotient problem `(Δ_g, τ)`.
    pub fn base_problem(&self) -> Result<QuotientProblem> {
        QuotientProblem::new(self.model.clone(), self.kac.clone(), self.roof.clone(), self.spec)
    }
}

/// A point of the flow spectrum together with the base point it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub big_b: f64,
    pub base: SpectrumPoint,
}

impl From<SpectrumPoint> for FlowPoint {
    fn from(base: SpectrumPoint) -> Self {
        FlowPoint { big_b: base.b + 1.0, base }
    }
}

pub fn flow_spectrum_point(problem: &SuspensionProblem, alpha: f64, tol: f64) -> Result<FlowPoint> {
    let settings = SolverSettings { tol, ..SolverSettings::default() };
    let mut solver = SpectrumSolver::new(problem.base_problem()?, settings)?;
    Ok(solver.point(alpha)?.into())
}

/// Flow spectrum over a grid, with the base regime report.
pub fn flow_spectrum(problem: &SuspensionProblem, grid: &[f64], settings: SolverSettings, refine_steps: usize) -> Result<(Vec<FlowPoint>, RegimeReport)> {
    let report = classify_regimes(&problem.base_problem()?, grid, settings, refine_steps)?;
    let points = report.points.iter().cloned().map(FlowPoint::from).collect();
    Ok((points, report))
}

/// Flow integral of the observable for the lift of a base measure: `∫Δ_g dν / ∫τ dν`.
pub fn kac_average(stats: &EquilibriumStats, kac: &Potential, roof: &Potential) -> Result<f64> {
    Ok(integral(stats, kac)? / integral(stats, roof)?)
}

/// Entropy of the lifted flow measure: `h(ν) / ∫τ dν`.
pub fn abramov_entropy(stats: &EquilibriumStats, roof: &Potential) -> Result<f64> {
    Ok(stats.entropy / integral(stats, roof)?)
}

fn integral(stats: &EquilibriumStats, p: &Potential) -> Result<f64> {
    stats.integral(p.name()).ok_or_else(|| Error::InvalidParameter(format!("potential `{}` was not tracked by the equilibrium", p.name())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FiniteModel, GaussModel};
    use crate::potential::{digit, log_digit};
    use std::sync::Arc;

    #[test]
    fn kac_of_digit_by_digit_is_square() {
        let k = kac_transform(&digit(), &digit());
        for a in 1..6 {
            assert_eq!(k.evaluate(&[a, 2], 0.3), (a * a) as f64);
        }
        assert_eq!(k.floor(), 1.0);
    }

    #[test]
    fn roof_needs_floor() {
        let m: SharedModel = Arc::new(GaussModel::new());
        let spec = TruncationSpec::new(10, 2).unwrap();
        assert!(matches!(SuspensionProblem::new(m, log_digit(), digit(), spec), Err(Error::Precondition(_))));
    }

    #[test]
    fn flow_point_adds_one() {
        let m: SharedModel = Arc::new(FiniteModel::uniform(vec![], 2).unwrap());
        let roof = Potential::first_symbol("roof", |a| a as f64).with_floor(1.0);
        let g = Potential::first_symbol("g", |a| if a == 1 { 0.0 } else { 1.0 });
        let p = SuspensionProblem::from_fiber_constant(m, roof, &g, TruncationSpec::new(2, 1).unwrap()).unwrap();
        let fp = flow_spectrum_point(&p, 0.5, 1e-10).unwrap();
        assert_eq!(fp.big_b, fp.base.b + 1.0);
    }
}
