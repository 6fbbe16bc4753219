use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{BoundarySummary, QuotientProblem, Regime, SolverSettings, SpectrumPoint, SpectrumSolver};

/// Number of interior points of the default grid.
pub const DEFAULT_GRID_POINTS: usize = 65;

/// `count` uniform points on `[α_m + h, α_M - h]` with `h = (α_M - α_m) / 128`.
pub fn default_grid(summary: &BoundarySummary, count: usize) -> Result<Vec<f64>> {
    let (lo, hi) = (summary.alpha_min, summary.alpha_max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidParameter("ratio range is unbounded; give an explicit alpha grid".into()));
    }
    if !(hi > lo) {
        return Err(Error::InvalidParameter(format!("empty ratio range [{lo}, {hi}]")));
    }
    let h = (hi - lo) / 128.0;
    Ok(uniform_grid(lo + h, hi - h, count))
}

/// `count` uniform points on `[lo, hi]` (the midpoint when `count == 1`).
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// A maximal run of grid points sharing a regime, with refined endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeInterval {
    pub regime: Regime,
    pub lo: f64,
    pub hi: f64,
}

/// Spectrum over a grid together with the regime partition.
#[derive(Debug, Clone)]
pub struct RegimeReport {
    pub dimension: f64,
    /// Solved points in grid order.
    pub points: Vec<SpectrumPoint>,
    /// Grid values the solver rejected, typically `OutOfRange` near `α_m` and `α_M`.
    pub skipped: Vec<(f64, Error)>,
    pub intervals: Vec<RegimeInterval>,
    /// J2 grid points outside the longest J2 run.
    pub offending: Vec<f64>,
}

impl RegimeReport {
    pub fn plateau_is_contiguous(&self) -> bool {
        self.offending.is_empty()
    }

    /// Error out when the plateau is split, which signals a truncation artifact.
    pub fn check_plateau(&self) -> Result<()> {
        if self.plateau_is_contiguous() {
            Ok(())
        } else {
            Err(Error::PlateauNotContiguous { offending: self.offending.clone() })
        }
    }

    pub fn interval(&self, regime: Regime) -> Option<RegimeInterval> {
        self.intervals.iter().copied().find(|i| i.regime == regime)
    }
}

/// Solve every grid point (in parallel, each from a cold start so the output
/// does not depend on scheduling) and locate regime changes by bisection.
pub fn classify_regimes(problem: &QuotientProblem, grid: &[f64], settings: SolverSettings, refine_steps: usize) -> Result<RegimeReport> {
    let template = SpectrumSolver::new(problem.clone(), settings)?;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let solved: Vec<(f64, Result<SpectrumPoint>)> = sorted
        .par_iter()
        .map(|&alpha| {
            let mut solver = template.clone();
            (alpha, solver.point(alpha))
        })
        .collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (alpha, r) in solved {
        match r {
            Ok(p) => points.push(p),
            Err(e @ Error::OutOfRange { .. }) => skipped.push((alpha, e)),
            Err(e) => return Err(e),
        }
    }

    let mut runs: Vec<(Regime, usize, usize)> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match runs.last_mut() {
            Some((r, _, end)) if *r == p.regime => *end = i,
            _ => runs.push((p.regime, i, i)),
        }
    }
    let boundaries: Vec<f64> = runs
        .windows(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|w| {
            let (left, right) = (points[w[0].2].alpha, points[w[1].1].alpha);
            let mut solver = template.clone();
            refine(&mut solver, left, right, w[0].0, refine_steps)
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut intervals = Vec::new();
    for (i, &(regime, start, end)) in runs.iter().enumerate() {
        let lo = if i == 0 { points[start].alpha } else { boundaries[i - 1] };
        let hi = if i + 1 == runs.len() { points[end].alpha } else { boundaries[i] };
        intervals.push(RegimeInterval { regime, lo, hi });
    }
    let plateau_runs: Vec<&(Regime, usize, usize)> = runs.iter().filter(|r| r.0 == Regime::J2).collect();
    let longest = plateau_runs.iter().max_by_key(|r| r.2 - r.1).copied();
    let offending = match longest {
        Some(&(_, s, e)) => points.iter().enumerate().filter(|(i, p)| p.regime == Regime::J2 && (*i < s || *i > e)).map(|(_, p)| p.alpha).collect(),
        None => Vec::new(),
    };
    Ok(RegimeReport { dimension: template.dimension(), points, skipped, intervals, offending })
}

fn refine(solver: &mut SpectrumSolver, mut left: f64, mut right: f64, left_regime: Regime, steps: usize) -> Result<f64> {
    for _ in 0..steps {
        let mid = 0.5 * (left + right);
        solver.engine().reset();
        if solver.regime_of(mid)? == left_regime {
            left = mid;
        } else {
            right = mid;
        }
    }
    Ok(0.5 * (left + right))
}

/// User-asserted hypotheses of the discontinuity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DiscontinuityHypotheses {
    /// Branch ratios `φ/ψ` tend to zero at the accumulation point.
    pub ratio_vanishes_at_accumulation: bool,
    /// Some invariant measure has `∫φ < 0`.
    pub negative_integral_exists: bool,
    /// The repeller dimension exceeds `s_∞`.
    pub dimension_exceeds_s_infinity: bool,
    /// The measure of maximal dimension has `∫φ > 0`.
    pub positive_at_maximal_measure: bool,
}

impl DiscontinuityHypotheses {
    pub fn all() -> Self {
        DiscontinuityHypotheses {
            ratio_vanishes_at_accumulation: true,
            negative_integral_exists: true,
            dimension_exceeds_s_infinity: true,
            positive_at_maximal_measure: true,
        }
    }

    fn check(&self) -> Result<()> {
        let missing: Vec<&str> = [
            (self.ratio_vanishes_at_accumulation, "ratio_vanishes_at_accumulation"),
            (self.negative_integral_exists, "negative_integral_exists"),
            (self.dimension_exceeds_s_infinity, "dimension_exceeds_s_infinity"),
            (self.positive_at_maximal_measure, "positive_at_maximal_measure"),
        ]
        .iter()
        .filter(|(ok, _)| !ok)
        .map(|(_, name)| *name)
        .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Precondition(format!("discontinuity hypotheses not asserted: {}", missing.join(", "))))
        }
    }
}

/// `b` at a few negative `α` compared with the value `dim Λ` at `α = 0`.
#[derive(Debug, Clone)]
pub struct DiscontinuityReport {
    pub dimension: f64,
    pub points: Vec<SpectrumPoint>,
    pub out_of_range: Vec<f64>,
    /// `max b(α)` over the probed negative `α`.
    pub sup_b: Option<f64>,
    /// `dim Λ - sup_b`.
    pub gap: Option<f64>,
    /// `b` is nondecreasing as `α` increases toward zero.
    pub monotone: bool,
}

/// Default probe points left of zero.
pub const DISCONTINUITY_ALPHAS: [f64; 3] = [-0.05, -0.02, -0.01];

pub fn discontinuity_probe(problem: &QuotientProblem, hypotheses: DiscontinuityHypotheses, alphas: &[f64], settings: SolverSettings) -> Result<DiscontinuityReport> {
    hypotheses.check()?;
    if alphas.iter().any(|&a| !(a < 0.0)) {
        return Err(Error::InvalidParameter("discontinuity probe points must be negative".into()));
    }
    let mut solver = SpectrumSolver::new(problem.clone(), settings)?;
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut points = Vec::new();
    let mut out_of_range = Vec::new();
    for alpha in sorted {
        solver.engine().reset();
        match solver.point(alpha) {
            Ok(p) => points.push(p),
            Err(Error::OutOfRange { .. }) => out_of_range.push(alpha),
            Err(e) => return Err(e),
        }
    }
    let sup_b = points.iter().map(|p| p.b).fold(None, |m: Option<f64>, b| Some(m.map_or(b, |m| m.max(b))));
    let monotone = points.windows(2).all(|w| w[1].b >= w[0].b - 1e-9);
    let dimension = solver.dimension();
    Ok(DiscontinuityReport { dimension, points, out_of_range, sup_b, gap: sup_b.map(|s| dimension - s), monotone })
}

/// `(ε, b(α - ε), b(α + ε))` for the smallest `ε` in `1e-1, 1e-2, ...` (down to
/// `min_epsilon`) at which both sides still solve.
pub fn epsilon_bracket(problem: &QuotientProblem, alpha: f64, min_epsilon: f64, settings: SolverSettings) -> Result<(f64, f64, f64)> {
    let mut solver = SpectrumSolver::new(problem.clone(), settings)?;
    let mut best = None;
    let mut eps = 0.1;
    while eps >= min_epsilon {
        solver.engine().reset();
        let left = solver.point(alpha - eps);
        solver.engine().reset();
        let right = solver.point(alpha + eps);
        match (left, right) {
            (Ok(l), Ok(r)) => best = Some((eps, l.b, r.b)),
            (Err(e), _) | (_, Err(e)) if !matches!(e, Error::OutOfRange { .. }) => return Err(e),
            _ => break,
        }
        eps /= 10.0;
    }
    best.ok_or(Error::OutOfRange { alpha })
}
