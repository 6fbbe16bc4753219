//! Dimension spectrum `b(α)` of level sets of Birkhoff quotients `S_n φ / S_n ψ`.
//!
//! For each `α` the solver looks for `δ` with `inf_q G1(α, q, δ) = 0`, where
//! `G1(α, q, δ) = P(q(φ - αψ) - δ log|T'|)` on the truncated system, the
//! infimum running over the `q` for which the full-system pressure is finite.

mod boundary;
mod regimes;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use boundary::{boundary_summary, BoundarySummary};
pub use regimes::{classify_regimes, default_grid, uniform_grid, discontinuity_probe, epsilon_bracket, DiscontinuityHypotheses, DiscontinuityReport, RegimeInterval, RegimeReport, DEFAULT_GRID_POINTS, DISCONTINUITY_ALPHAS};

use crate::cylinder::TruncationSpec;
use crate::error::{Error, Result};
use crate::model::SharedModel;
use crate::potential::{log_derivative, Potential};
use crate::pressure::{bowen_root, FinitenessProbe, PressureValue, DEFAULT_PROBE_CUTOFF};
use crate::transfer::{CylinderTable, EigenSettings, EquilibriumStats, PressureEngine};

/// `J(α)` for the pair `(φ, ψ)` on a model, studied through a truncation.
#[derive(Debug, Clone)]
pub struct QuotientProblem {
    pub model: SharedModel,
    pub phi: Potential,
    pub psi: Potential,
    pub spec: TruncationSpec,
}

impl QuotientProblem {
    /// `ψ` must carry a positive floor `η`.
    pub fn new(model: SharedModel, phi: Potential, psi: Potential, spec: TruncationSpec) -> Result<Self> {
        if !(psi.floor() > 0.0) {
            return Err(Error::Precondition(format!("denominator `{}` must be bounded below by some η > 0", psi.name())));
        }
        if phi.name() == psi.name() {
            return Err(Error::InvalidParameter("numerator and denominator must be distinct potentials".into()));
        }
        Ok(QuotientProblem { model, phi, psi, spec })
    }
}

/// Where a grid point sits in the partition of `(α_m, α_M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    J1,
    J2,
    J3,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::J1 => "J1",
            Regime::J2 => "J2",
            Regime::J3 => "J3",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "J1" => Ok(Regime::J1),
            "J2" => Ok(Regime::J2),
            "J3" => Ok(Regime::J3),
            other => Err(Error::InvalidParameter(format!("unknown regime `{other}`"))),
        }
    }
}

/// One solved point of the spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub b: f64,
    /// Critical `q`; `None` on the plateau.
    pub q_c: Option<f64>,
    pub regime: Regime,
    pub n: usize,
    pub k: usize,
    /// `G1(α, q_c, b)` (on the plateau: `P(-b log|T'|)`).
    pub res_g1: f64,
    /// `∂_q G1(α, q_c, b)`; `None` on the plateau.
    pub res_dg1: Option<f64>,
    /// Equilibrium state at the solution.
    pub stats: EquilibriumStats,
}

impl SpectrumPoint {
    /// `∫φ dμ / ∫ψ dμ` of the equilibrium state at the solution.
    pub fn equilibrium_ratio(&self, problem: &QuotientProblem) -> f64 {
        self.stats.integral(problem.phi.name()).unwrap_or(f64::NAN) / self.stats.integral(problem.psi.name()).unwrap_or(f64::NAN)
    }
}

/// Tolerances of the spectrum solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Target accuracy in `δ`.
    pub tol: f64,
    /// `ε` of the plateau test `inf_q G1(α, q, dim - ε) ≥ 0`; `None` means `max(tol, 1e-4)`.
    pub plateau_epsilon: Option<f64>,
    /// Inner searches giving up beyond `|q| = q_max` report `OutOfRange`.
    pub q_max: f64,
    /// Largest symbol probed when deciding finiteness of full-system pressures.
    pub probe_cutoff: usize,
    pub eigen: EigenSettings,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tol: 1e-10, plateau_epsilon: None, q_max: 1e6, probe_cutoff: DEFAULT_PROBE_CUTOFF, eigen: EigenSettings::default() }
    }
}

impl SolverSettings {
    pub fn epsilon(&self) -> f64 {
        self.plateau_epsilon.unwrap_or(self.tol.max(1e-4))
    }
}

/// Closed interval of `q` on which the full-system `G1` is finite.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Domain {
    lo: f64,
    hi: f64,
}

impl Domain {
    fn clamp(&self, q: f64) -> f64 {
        q.max(self.lo).min(self.hi)
    }
}

/// Result of the inner minimization over `q`.
#[derive(Debug, Clone)]
struct Inner {
    q: f64,
    value: f64,
    derivative: f64,
    stats: EquilibriumStats,
}

/// Shared state for solving many points of one problem: the cylinder
/// table, the truncated repeller dimension and the finiteness probe.
#[derive(Debug, Clone)]
pub struct SpectrumSolver {
    problem: QuotientProblem,
    settings: SolverSettings,
    engine: PressureEngine,
    probe: FinitenessProbe,
    dim: f64,
    phi_col: usize,
    psi_col: usize,
    /// Last secant estimate of `∂²G1/∂q²`, used to size the first bracketing step.
    slope: Option<f64>,
}

/// Domain edges closer to zero than this are taken to be zero; the probe
/// cannot resolve exponential tails `exp(q a)` with `|q| < log(A)/A` at its cutoff `A`.
const DOMAIN_SNAP: f64 = 1e-3;

/// Beyond this `|q|` a failed eigen-solve is taken to mean the level set is not
/// resolvable by the truncation.
const Q_RESOLVE: f64 = 100.0;

impl SpectrumSolver {
    pub fn new(problem: QuotientProblem, settings: SolverSettings) -> Result<Self> {
        let potentials = [problem.phi.clone(), problem.psi.clone()];
        let table = Arc::new(CylinderTable::build(&problem.model, &potentials, problem.spec)?);
        let phi_col = table.index_of(&problem.phi)?;
        let psi_col = table.index_of(&problem.psi)?;
        let mut engine = PressureEngine::new(table).with_settings(settings.eigen);
        let dim = bowen_root(&mut engine, 1e-13)?;
        engine.reset();
        let probe_set = [log_derivative(problem.model.clone()), problem.phi.clone(), problem.psi.clone()];
        let probe = FinitenessProbe::new(&problem.model, &probe_set, settings.probe_cutoff)?;
        Ok(SpectrumSolver { problem, settings, engine, probe, dim, phi_col, psi_col, slope: None })
    }

    pub fn problem(&self) -> &QuotientProblem {
        &self.problem
    }

    pub fn settings(&self) -> SolverSettings {
        self.settings
    }

    /// Bowen root of the truncated system.
    pub fn dimension(&self) -> f64 {
        self.dim
    }

    pub fn engine(&mut self) -> &mut PressureEngine {
        &mut self.engine
    }

    fn coeffs(&self, alpha: f64, q: f64, delta: f64) -> Vec<f64> {
        let mut c = vec![0.0; self.engine.table().width()];
        c[0] = -delta;
        c[self.phi_col] += q;
        c[self.psi_col] -= q * alpha;
        c
    }

    fn full_system_finite(&self, alpha: f64, q: f64, delta: f64) -> Result<bool> {
        match self.probe.is_finite(&[-delta, q, -q * alpha]) {
            Ok(v) => Ok(v),
            // inconclusive tails are treated as divergent
            Err(Error::Inconclusive { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// `G1(α, q, δ)`, `+∞` when the full-system pressure diverges.
    pub fn g1(&mut self, alpha: f64, q: f64, delta: f64) -> Result<PressureValue> {
        if !self.full_system_finite(alpha, q, delta)? {
            return Ok(PressureValue::infinite());
        }
        let c = self.coeffs(alpha, q, delta);
        let value = self.engine.log_eigenvalue(&c)?;
        Ok(PressureValue::finite(value, self.engine.table().error_bound(&c)))
    }

    fn domain(&self, alpha: f64, delta: f64) -> Result<Option<Domain>> {
        let qmax = self.settings.q_max;
        let finite = |q: f64| self.full_system_finite(alpha, q, delta);
        let mut seed = None;
        let mut trial = 0.0;
        if finite(0.0)? {
            seed = Some(0.0);
        } else {
            let mut mag = 1e-3;
            while mag <= qmax && seed.is_none() {
                for q in [mag, -mag] {
                    if finite(q)? {
                        seed = Some(q);
                        break;
                    }
                }
                trial = mag;
                mag *= 4.0;
            }
        }
        let _ = trial;
        let Some(q0) = seed else { return Ok(None) };
        let edge = |dir: f64| -> Result<f64> {
            let mut inside = q0;
            let mut step = 1.0;
            loop {
                let probe = q0 + dir * step;
                if probe.abs() > qmax {
                    return Ok(dir * f64::INFINITY);
                }
                if !finite(probe)? {
                    let mut outside = probe;
                    for _ in 0..60 {
                        let mid = 0.5 * (inside + outside);
                        if finite(mid)? {
                            inside = mid;
                        } else {
                            outside = mid;
                        }
                    }
                    return Ok(if inside.abs() < DOMAIN_SNAP { 0.0 } else { inside });
                }
                inside = probe;
                step *= 4.0;
            }
        };
        Ok(Some(Domain { lo: edge(-1.0)?, hi: edge(1.0)? }))
    }

    fn evaluate(&mut self, alpha: f64, q: f64, delta: f64) -> Result<(EquilibriumStats, f64)> {
        let c = self.coeffs(alpha, q, delta);
        let stats = self.engine.equilibrium(&c)?;
        let d = stats.values[self.phi_col] - alpha * stats.values[self.psi_col];
        Ok((stats, d))
    }

    /// `min_q G1(α, q, δ)` over the finiteness domain; `None` if the domain is empty.
    fn inner_at(&mut self, alpha: f64, q: f64, delta: f64) -> Result<Inner> {
        let (stats, derivative) = self.evaluate(alpha, q, delta)?;
        Ok(Inner { q, value: stats.pressure, derivative, stats })
    }

    /// `min_q G1(α, q, δ)` over the finiteness domain; `None` if the domain is empty.
    ///
    /// `∂_q G1 = ∫φ - α∫ψ` is increasing in `q`; its root is found by secant
    /// steps, safeguarded by bisection once a sign change is bracketed.
    fn minimize(&mut self, alpha: f64, delta: f64, guess: f64) -> Result<Option<Inner>> {
        let Some(dom) = self.domain(alpha, delta)? else { return Ok(None) };
        let qmax = self.settings.q_max;
        let (phi, psi) = (self.phi_col, self.psi_col);
        let small = |i: &Inner| i.derivative.abs() <= 1e-12 * (i.stats.values[phi].abs() + alpha.abs() * i.stats.values[psi].abs()).max(1e-300);
        let mut cur = self.inner_at(alpha, dom.clamp(guess), delta)?;
        if small(&cur) {
            let origin = dom.clamp(0.0);
            if origin != cur.q {
                let at_origin = self.inner_at(alpha, origin, delta)?;
                if (at_origin.value - cur.value).abs() <= 1e-12 * (1.0 + cur.value.abs()) {
                    // flat in q: φ - αψ is cohomologous to a constant on the truncation
                    return Ok(Some(at_origin));
                }
            }
            return Ok(Some(cur));
        }
        let mut below: Option<(f64, f64)> = None;
        let mut above: Option<(f64, f64)> = None;
        let mut prev: Option<(f64, f64)> = None;
        for _ in 0..300 {
            if cur.derivative < 0.0 {
                below = Some((cur.q, cur.derivative));
            } else {
                above = Some((cur.q, cur.derivative));
            }
            let secant = prev.map(|(pq, pd)| (cur.derivative - pd) / (cur.q - pq)).filter(|k| *k > 0.0 && k.is_finite());
            if let Some(k) = secant {
                self.slope = Some(k);
            }
            let slope = secant.or(self.slope);
            let mut next = match slope {
                Some(k) => cur.q - cur.derivative / k,
                None => cur.q - cur.derivative.signum() * 0.5_f64.max(0.5 * cur.q.abs()),
            };
            match (below, above) {
                (Some((a, _)), Some((b, _))) => {
                    let (lo, hi) = (a.min(b), a.max(b));
                    if !(next > lo && next < hi) {
                        next = 0.5 * (lo + hi);
                    }
                }
                _ => {
                    // one-sided: cap extrapolation at a few times the last move
                    let reach = prev.map_or(f64::INFINITY, |(pq, _)| 4.0 * (cur.q - pq).abs()).max(0.5 * cur.q.abs().max(1.0));
                    next = cur.q + (next - cur.q).clamp(-reach, reach);
                }
            }
            next = dom.clamp(next);
            if next == cur.q {
                // the minimizer sits on the edge of the finiteness domain
                return Ok(Some(cur));
            }
            if next.abs() > qmax {
                return Err(Error::OutOfRange { alpha });
            }
            let xtol = 1e-12 * next.abs().max(1.0);
            let step = (next - cur.q).abs();
            prev = Some((cur.q, cur.derivative));
            cur = match self.inner_at(alpha, next, delta) {
                Ok(inner) => inner,
                // Far out on a one-sided search the transfer matrix degenerates to a
                // single cycle before the bound q_max is reached: α is not resolvable.
                Err(Error::EigenNotConverged { .. } | Error::EntropyMismatch { .. }) if below.is_none() || above.is_none() || next.abs() >= Q_RESOLVE => {
                    return Err(Error::OutOfRange { alpha });
                }
                Err(e) => return Err(e),
            };
            if small(&cur) || step <= xtol {
                return Ok(Some(cur));
            }
            if let (Some((a, _)), Some((b, _))) = (below, above) {
                if (a - b).abs() <= xtol {
                    return Ok(Some(cur));
                }
            }
        }
        Err(Error::OutOfRange { alpha })
    }

    /// Solve one point of the spectrum. `alpha` must lie inside the truncated
    /// system's ratio range.
    pub fn point(&mut self, alpha: f64) -> Result<SpectrumPoint> {
        self.point_from(alpha, None)
    }

    /// As `point`, starting the searches from a previous solution.
    pub fn point_from(&mut self, alpha: f64, previous: Option<&SpectrumPoint>) -> Result<SpectrumPoint> {
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter("alpha must be finite".into()));
        }
        let spec = self.problem.spec;
        let eps = self.settings.epsilon();
        let plateau_delta = (self.dim - eps).max(0.0);
        let q_guess = previous.and_then(|p| p.q_c).unwrap_or(0.0);
        let plateau = self.minimize(alpha, plateau_delta, q_guess)?;
        let plateau = match plateau {
            None => None,
            Some(inner) if inner.value >= 0.0 => None,
            Some(inner) => Some(inner),
        };
        let Some(right) = plateau else {
            // J2: the infimum stays nonnegative right below the repeller dimension.
            let c = self.coeffs(alpha, 0.0, self.dim);
            let stats = self.engine.equilibrium(&c)?;
            return Ok(SpectrumPoint {
                alpha,
                b: self.dim,
                q_c: None,
                regime: Regime::J2,
                n: spec.cutoff,
                k: spec.depth,
                res_g1: stats.pressure,
                res_dg1: None,
                stats,
            });
        };

        // m(δ) is convex and decreasing with m'(δ) = -λ at the minimizer: Newton
        // from any point lands to the left of the root, then increases monotonically.
        let mut lo: f64 = 0.0;
        let mut hi = plateau_delta;
        let mut best = right;
        let mut delta = plateau_delta;
        if let Some(p) = previous.filter(|p| p.regime != Regime::J2 && p.b < plateau_delta) {
            if let Some(inner) = self.minimize(alpha, p.b, best.q)? {
                delta = p.b;
                best = inner;
            }
        }
        for _ in 0..200 {
            let m = best.value;
            if m >= 0.0 {
                lo = lo.max(delta);
            } else {
                hi = hi.min(delta);
            }
            let mut next = delta + m / best.stats.lyapunov;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let done = (next - delta).abs() <= self.settings.tol || hi - lo <= self.settings.tol;
            if next == delta {
                break;
            }
            match self.minimize(alpha, next, best.q)? {
                Some(inner) => {
                    delta = next;
                    best = inner;
                }
                // G1 is +∞ for every q: next lies left of the root
                None => lo = next,
            }
            if done {
                break;
            }
        }
        let regime = if best.q < 0.0 {
            Regime::J1
        } else if best.q > 0.0 {
            Regime::J3
        } else {
            Regime::J2
        };
        Ok(SpectrumPoint {
            alpha,
            b: delta,
            q_c: Some(best.q),
            regime,
            n: spec.cutoff,
            k: spec.depth,
            res_g1: best.value,
            res_dg1: Some(best.derivative),
            stats: best.stats,
        })
    }

    /// Regime of `α` from the plateau test alone (no `δ` solve).
    pub fn regime_of(&mut self, alpha: f64) -> Result<Regime> {
        let plateau_delta = (self.dim - self.settings.epsilon()).max(0.0);
        match self.minimize(alpha, plateau_delta, 0.0)? {
            Some(inner) if inner.value < 0.0 => Ok(if inner.q < 0.0 {
                Regime::J1
            } else if inner.q > 0.0 {
                Regime::J3
            } else {
                Regime::J2
            }),
            _ => Ok(Regime::J2),
        }
    }
}

/// Convenience wrapper: `G1` for a single evaluation.
pub fn g1(problem: &QuotientProblem, alpha: f64, q: f64, delta: f64) -> Result<PressureValue> {
    SpectrumSolver::new(problem.clone(), SolverSettings::default())?.g1(alpha, q, delta)
}

/// Convenience wrapper: solve one point with default settings.
pub fn spectrum_point(problem: &QuotientProblem, alpha: f64, tol: f64) -> Result<SpectrumPoint> {
    let settings = SolverSettings { tol, ..SolverSettings::default() };
    SpectrumSolver::new(problem.clone(), settings)?.point(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FiniteModel;

    fn symmetric_pair() -> QuotientProblem {
        let m: SharedModel = Arc::new(FiniteModel::uniform(vec![], 2).unwrap());
        let phi = Potential::first_symbol("phi", |a| if a == 1 { 0.0 } else { 1.0 });
        let psi = Potential::first_symbol("psi", |_| 1.0).with_floor(1.0);
        QuotientProblem::new(m, phi, psi, TruncationSpec::new(2, 1).unwrap()).unwrap()
    }

    #[test]
    fn rejects_denominator_without_floor() {
        let m: SharedModel = Arc::new(FiniteModel::uniform(vec![], 2).unwrap());
        let phi = Potential::first_symbol("phi", |a| a as f64);
        let psi = Potential::first_symbol("psi", |a| a as f64 - 1.0);
        assert!(matches!(QuotientProblem::new(m, phi, psi, TruncationSpec::new(2, 1).unwrap()), Err(Error::Precondition(_))));
    }

    #[test]
    fn symmetric_pair_midpoint_is_full_dimension() {
        let p = symmetric_pair();
        let pt = spectrum_point(&p, 0.5, 1e-10).unwrap();
        assert_eq!(pt.regime, Regime::J2);
        assert!((pt.b - 1.0).abs() < 1e-9, "{}", pt.b);
        assert!(pt.q_c.is_none());
    }

    #[test]
    fn symmetric_pair_off_center() {
        // Bernoulli(p) with p = P(symbol 2) = α has dimension H(α) / log 2.
        let p = symmetric_pair();
        for alpha in [0.2, 0.35, 0.8] {
            let pt = spectrum_point(&p, alpha, 1e-11).unwrap();
            let h = -(alpha * alpha.ln() + (1.0 - alpha) * (1.0 - alpha).ln());
            assert!((pt.b - h / 2f64.ln()).abs() < 1e-8, "α={alpha}: {} vs {}", pt.b, h / 2f64.ln());
            assert_eq!(pt.regime, if alpha < 0.5 { Regime::J1 } else { Regime::J3 });
        }
    }

    #[test]
    fn out_of_range_alpha() {
        let p = symmetric_pair();
        assert!(matches!(spectrum_point(&p, 1.2, 1e-9), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn flat_combination_is_detected() {
        let m: SharedModel = Arc::new(FiniteModel::uniform(vec![], 2).unwrap());
        let phi = Potential::first_symbol("phi", |_| 0.5);
        let psi = Potential::first_symbol("psi", |_| 1.0).with_floor(1.0);
        let p = QuotientProblem::new(m, phi, psi, TruncationSpec::new(2, 1).unwrap()).unwrap();
        let mut s = SpectrumSolver::new(p, SolverSettings::default()).unwrap();
        let a = s.g1(0.5, -3.0, 0.7).unwrap().value;
        let b = s.g1(0.5, 5.0, 0.7).unwrap().value;
        assert!((a - b).abs() < 1e-14);
        let pt = s.point(0.5).unwrap();
        assert_eq!(pt.regime, Regime::J2);
    }
}
