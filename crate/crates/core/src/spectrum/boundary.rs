use crate::cylinder::{periodic_birkhoff_sum, periodic_point};
use crate::error::{Error, Result};
use crate::model::Symbol;
use crate::scalar::wynn_epsilon;

use super::QuotientProblem;

/// Extremes of the quotient over invariant measures, and the accumulation set
/// `E = [α̲, α̅]` of branch ratios at the accumulation point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundarySummary {
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// `None` for finite alphabets, where `E` is empty.
    pub alpha_lower: Option<f64>,
    pub alpha_upper: Option<f64>,
    /// Branch ratios grow without bound (`α_M = ∞`).
    pub diverges: bool,
}

impl BoundarySummary {
    pub fn accumulation_interval(&self) -> Option<(f64, f64)> {
        Some((self.alpha_lower?, self.alpha_upper?))
    }

    /// Whether `alpha` lies in `E`, up to `tol`.
    pub fn in_accumulation(&self, alpha: f64, tol: f64) -> bool {
        self.accumulation_interval().is_some_and(|(lo, hi)| alpha >= lo - tol && alpha <= hi + tol)
    }

    pub fn contains(&self, alpha: f64) -> bool {
        alpha > self.alpha_min && alpha < self.alpha_max
    }
}

/// Symbols whose fixed points are always scanned.
const EXHAUSTIVE: usize = 1000;
/// Depth-two periodic orbits `(ab)^∞` with `a, b` up to this bound convexify the scan.
const PAIRS: usize = 64;

fn fixed_point_ratio(problem: &QuotientProblem, a: Symbol) -> Result<f64> {
    let x = periodic_point(problem.model.as_ref(), &[a])?;
    Ok(problem.phi.at(a, x) / problem.psi.at(a, x))
}

/// `α_m`, `α_M`, `α̲`, `α̅` from periodic orbits and the tail of branch ratios
/// up to `probe_cutoff`.
pub fn boundary_summary(problem: &QuotientProblem, probe_cutoff: usize) -> Result<BoundarySummary> {
    let model = problem.model.as_ref();
    let limit = model.alphabet().clamp(probe_cutoff.max(2));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut record = |r: f64| {
        if r.is_finite() {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    };
    for a in 1..=limit.min(EXHAUSTIVE) {
        record(fixed_point_ratio(problem, a)?);
    }
    let pair_limit = limit.min(PAIRS);
    for a in 1..=pair_limit {
        for b in a + 1..=pair_limit {
            let word = [a, b];
            let num = periodic_birkhoff_sum(model, &problem.phi, &word)?;
            let den = periodic_birkhoff_sum(model, &problem.psi, &word)?;
            record(num / den);
        }
    }

    if model.alphabet().is_finite() {
        let mut a = EXHAUSTIVE + 1;
        while a <= limit {
            record(fixed_point_ratio(problem, a)?);
            a = a * 3 / 2;
        }
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter("no finite quotient on any periodic orbit".into()));
        }
        return Ok(BoundarySummary { alpha_min: lo, alpha_max: hi, alpha_lower: None, alpha_upper: None, diverges: false });
    }

    let mut symbols = Vec::new();
    let mut a: usize = 1;
    while a <= limit {
        symbols.push(a);
        a *= 2;
    }
    let ratios = symbols.iter().map(|&a| fixed_point_ratio(problem, a)).collect::<Result<Vec<f64>>>()?;
    for &r in &ratios {
        record(r);
    }
    let tail = &ratios[ratios.len() / 3..];
    let logs: Vec<f64> = symbols[ratios.len() / 3..].iter().map(|&a| (a as f64).ln().ln()).collect();
    // elasticity of |ratio| against log a: at least 1/2 on the whole tail means growth like a power of log a or faster
    let elastic = tail.len() >= 4
        && (tail.len() - 4..tail.len() - 1).all(|j| {
            let (r0, r1) = (tail[j].abs(), tail[j + 1].abs());
            r1 > r0 && r0 > 0.0 && (r1.ln() - r0.ln()) / (logs[j + 1] - logs[j]) >= 0.5
        });
    if elastic {
        let up = tail[tail.len() - 1] > 0.0;
        let (alpha_min, alpha_max) = if up { (lo, f64::INFINITY) } else { (f64::NEG_INFINITY, hi) };
        let inf = if up { f64::INFINITY } else { f64::NEG_INFINITY };
        return Ok(BoundarySummary { alpha_min, alpha_max, alpha_lower: Some(inf), alpha_upper: Some(inf), diverges: true });
    }
    let limit_ratio = wynn_epsilon(tail).unwrap_or(f64::NAN);
    let (under, over) = if limit_ratio.is_finite() {
        (limit_ratio, limit_ratio)
    } else {
        (tail.iter().cloned().fold(f64::INFINITY, f64::min), tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
    };
    let (alpha_min, alpha_max) = (lo.min(under), hi.max(over));
    // extrapolated limits this close to an orbit extremum are indistinguishable from it
    let resolution = SNAP * (alpha_max - alpha_min).abs().max(f64::MIN_POSITIVE);
    let snap = |x: f64| if (x - alpha_min).abs() <= resolution { alpha_min } else if (x - alpha_max).abs() <= resolution { alpha_max } else { x };
    Ok(BoundarySummary { alpha_min, alpha_max, alpha_lower: Some(snap(under)), alpha_upper: Some(snap(over)), diverges: false })
}

const SNAP: f64 = 1e-12;
