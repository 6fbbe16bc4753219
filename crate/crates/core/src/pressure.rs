//! Topological pressure, finiteness of the full-system pressure, `s_∞`, and Bowen roots.

use std::sync::Arc;

use crate::cylinder::TruncationSpec;
use crate::error::{Error, Result};
use crate::model::SharedModel;
use crate::potential::{log_derivative, Potential};
use crate::transfer::{CylinderTable, EquilibriumStats, PressureEngine};

/// Largest symbol examined by the default finiteness probe (`2^20 > 10^6`).
pub const DEFAULT_PROBE_CUTOFF: usize = 1 << 20;

/// Pressure on an extended real line, with a depth-`k` error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureValue {
    /// `f64::INFINITY` when the full-system pressure diverges.
    pub value: f64,
    pub error_bound: f64,
}

impl PressureValue {
    pub fn finite(value: f64, error_bound: f64) -> Self {
        PressureValue { value, error_bound }
    }

    pub fn infinite() -> Self {
        PressureValue { value: f64::INFINITY, error_bound: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// A finite linear combination `sum c_i p_i` of potentials.
#[derive(Debug, Clone, Default)]
pub struct Combination {
    terms: Vec<(Potential, f64)>,
}

impl Combination {
    pub fn new() -> Self {
        Combination::default()
    }

    pub fn with(mut self, potential: Potential, coefficient: f64) -> Self {
        self.terms.push((potential, coefficient));
        self
    }

    /// `-s log|T'|`.
    pub fn geometric(model: &SharedModel, s: f64) -> Self {
        Combination::new().with(log_derivative(model.clone()), -s)
    }

    pub fn terms(&self) -> &[(Potential, f64)] {
        &self.terms
    }

    pub fn potentials(&self) -> Vec<Potential> {
        self.terms.iter().map(|(p, _)| p.clone()).collect()
    }

    /// Coefficients aligned with the columns of `table`.
    pub fn coefficients_for(&self, table: &CylinderTable) -> Result<Vec<f64>> {
        let mut out = vec![0.0; table.width()];
        for (p, c) in &self.terms {
            out[table.index_of(p)?] += c;
        }
        Ok(out)
    }
}

/// Per-branch suprema of potentials at geometrically spaced symbols, used to
/// decide whether `sum_a exp(sup_(I_a) sum c_i p_i)` converges.
///
/// The supremum over a branch is approximated by the maximum over the images
/// of `0`, `1/2` and `1`.
#[derive(Debug, Clone)]
pub struct FinitenessProbe {
    finite_alphabet: bool,
    symbols: Vec<usize>,
    /// `values[potential][sample][j]` at symbol `symbols[j]`.
    values: Vec<[Vec<f64>; 3]>,
}

const SAMPLES: [f64; 3] = [0.0, 0.5, 1.0];

impl FinitenessProbe {
    pub fn new(model: &SharedModel, potentials: &[Potential], cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidParameter("finiteness probe needs a cutoff of at least 2".into()));
        }
        if model.alphabet().is_finite() {
            return Ok(FinitenessProbe { finite_alphabet: true, symbols: Vec::new(), values: Vec::new() });
        }
        let mut symbols = Vec::new();
        let mut a = 1usize;
        while a <= cutoff {
            symbols.push(a);
            a *= 2;
        }
        let mut values: Vec<[Vec<f64>; 3]> = potentials.iter().map(|_| [Vec::new(), Vec::new(), Vec::new()]).collect();
        for (i, &x) in SAMPLES.iter().enumerate() {
            let images = model.branch_images(x, *symbols.last().expect("nonempty"));
            for (p, slot) in potentials.iter().zip(values.iter_mut()) {
                let along = p.along_chain(&images);
                slot[i] = symbols.iter().map(|&a| along[a - 1]).collect();
            }
        }
        Ok(FinitenessProbe { finite_alphabet: false, symbols, values })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// `log sup_(I_a) sum c_i p_i` at each probe symbol.
    pub fn log_weights(&self, coeffs: &[f64]) -> Vec<f64> {
        (0..self.symbols.len())
            .map(|j| {
                (0..3)
                    .map(|i| coeffs.iter().zip(&self.values).map(|(c, v)| if *c == 0.0 { 0.0 } else { c * v[i][j] }).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    /// Local power-law decay exponents `-Δ log w / Δ log a` over the tail of the
    /// probe (symbols from 1024 on, or the last few when the probe is short).
    pub fn tail_exponents(&self, coeffs: &[f64]) -> Vec<f64> {
        let logs = self.log_weights(coeffs);
        let start = self.symbols.iter().position(|&a| a >= 1024).unwrap_or(0).min(self.symbols.len().saturating_sub(5));
        (start..logs.len().saturating_sub(1))
            .map(|j| {
                let da = (self.symbols[j + 1] as f64 / self.symbols[j] as f64).ln();
                -(logs[j + 1] - logs[j]) / da
            })
            .collect()
    }

    /// Whether the one-symbol weight series of the combination converges.
    pub fn is_finite(&self, coeffs: &[f64]) -> Result<bool> {
        if self.finite_alphabet {
            return Ok(true);
        }
        if coeffs.len() != self.values.len() {
            return Err(Error::InvalidParameter("coefficient count differs from the probed potentials".into()));
        }
        let exps = self.tail_exponents(coeffs);
        if exps.is_empty() || exps.iter().any(|p| p.is_nan()) {
            return Err(Error::Inconclusive { exponents: exps });
        }
        const MARGIN: f64 = 1e-9;
        if exps.iter().all(|&p| p > 1.0 + MARGIN) {
            return Ok(true);
        }
        if exps.iter().all(|&p| p <= 1.0 + MARGIN) {
            return Ok(false);
        }
        let slack = 1e-9 * exps.iter().fold(1.0_f64, |m, p| m.max(p.abs()));
        let rising = exps.windows(2).all(|w| w[1] >= w[0] - slack);
        let falling = exps.windows(2).all(|w| w[1] <= w[0] + slack);
        if rising || falling {
            Ok(*exps.last().expect("nonempty") > 1.0 + MARGIN)
        } else {
            Err(Error::Inconclusive { exponents: exps })
        }
    }
}

/// Whether the full-system pressure of the combination is finite.
pub fn finiteness_test(model: &SharedModel, combination: &Combination, probe_cutoff: usize) -> Result<bool> {
    let probe = FinitenessProbe::new(model, &combination.potentials(), probe_cutoff)?;
    let coeffs: Vec<f64> = combination.terms().iter().map(|(_, c)| *c).collect();
    probe.is_finite(&coeffs)
}

/// Pressure of the combination on the truncation `spec`, or `+∞` when the
/// full-system pressure diverges (infinite alphabets only).
pub fn pressure(model: &SharedModel, combination: &Combination, spec: TruncationSpec) -> Result<PressureValue> {
    if !model.alphabet().is_finite() && !finiteness_test(model, combination, DEFAULT_PROBE_CUTOFF)? {
        return Ok(PressureValue::infinite());
    }
    let table = Arc::new(CylinderTable::build(model, &combination.potentials(), spec)?);
    let coeffs = combination.coefficients_for(&table)?;
    let mut engine = PressureEngine::new(table.clone());
    Ok(PressureValue::finite(engine.log_eigenvalue(&coeffs)?, table.error_bound(&coeffs)))
}

/// Equilibrium statistics of the combination on the truncation, integrating
/// every potential in `tracked` as well.
pub fn equilibrium_stats(model: &SharedModel, combination: &Combination, spec: TruncationSpec, tracked: &[Potential]) -> Result<EquilibriumStats> {
    let mut all = combination.potentials();
    all.extend(tracked.iter().cloned());
    let table = Arc::new(CylinderTable::build(model, &all, spec)?);
    let coeffs = combination.coefficients_for(&table)?;
    PressureEngine::new(table).equilibrium(&coeffs)
}

/// `inf { s : P(-s log|T'|) < ∞ }`, or `-∞` for finite alphabets.
pub fn s_infinity(model: &SharedModel) -> Result<f64> {
    s_infinity_with(model, DEFAULT_PROBE_CUTOFF, 1e-4)
}

pub fn s_infinity_with(model: &SharedModel, probe_cutoff: usize, tol: f64) -> Result<f64> {
    if model.alphabet().is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    let probe = FinitenessProbe::new(model, &[log_derivative(model.clone())], probe_cutoff)?;
    let finite = |s: f64| probe.is_finite(&[-s]);
    if finite(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while !finite(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1024.0 {
            return Err(Error::InfinitePressure);
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if finite(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of `s -> P_n(-s log|T'|)` for a pressure engine whose column 0 is `log|T'|`.
pub fn bowen_root(engine: &mut PressureEngine, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let width = engine.table().width();
    let coeffs = |s: f64| {
        let mut c = vec![0.0; width];
        c[0] = -s;
        c
    };
    let at_zero = engine.log_eigenvalue(&coeffs(0.0))?;
    if at_zero <= 0.0 {
        // a single orbit (or nothing): P(-s log|T'|) = -s λ vanishes only at 0
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while engine.log_eigenvalue(&coeffs(hi))? > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NotBracketed { lo, hi, f_lo: at_zero, f_hi: f64::NAN });
        }
    }
    // Newton from the left of a convex decreasing function moves monotonically
    // towards the root; bisection guards against stalls.
    let mut s = lo;
    for _ in 0..200 {
        let stats = engine.equilibrium(&coeffs(s))?;
        let p = stats.pressure;
        if p > 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let mut next = s + p / stats.lyapunov;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= tol || hi - lo <= tol {
            return Ok(next);
        }
        s = next;
    }
    Ok(s)
}

/// Bowen root on the truncation `spec`.
pub fn bowen_dimension(model: &SharedModel, spec: TruncationSpec, tol: f64) -> Result<f64> {
    let table = Arc::new(CylinderTable::build(model, &[], spec)?);
    bowen_root(&mut PressureEngine::new(table), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FiniteModel, GaussModel, MpInducedModel};
    use crate::potential::{digit, log_digit};

    #[test]
    fn gauss_finiteness_examples() {
        let g: SharedModel = Arc::new(GaussModel);
        assert!(finiteness_test(&g, &Combination::geometric(&g, 0.75), DEFAULT_PROBE_CUTOFF).unwrap());
        assert!(!finiteness_test(&g, &Combination::geometric(&g, 0.40), DEFAULT_PROBE_CUTOFF).unwrap());
        let f: SharedModel = Arc::new(FiniteModel::uniform(vec![], 3).unwrap());
        assert!(finiteness_test(&f, &Combination::geometric(&f, -5.0), 64).unwrap());
    }

    #[test]
    fn exponential_tails() {
        let g: SharedModel = Arc::new(GaussModel);
        let good = Combination::new().with(log_digit(), 1.0).with(digit(), -0.1);
        let bad = Combination::new().with(log_digit(), -1.0).with(digit(), 0.1);
        assert!(finiteness_test(&g, &good, DEFAULT_PROBE_CUTOFF).unwrap());
        assert!(!finiteness_test(&g, &bad, DEFAULT_PROBE_CUTOFF).unwrap());
    }

    #[test]
    fn infinite_pressure_is_flagged() {
        let g: SharedModel = Arc::new(GaussModel);
        let spec = TruncationSpec::new(10, 2).unwrap();
        assert!(!pressure(&g, &Combination::geometric(&g, 0.4), spec).unwrap().is_finite());
        let p = pressure(&g, &Combination::geometric(&g, 0.9), spec).unwrap();
        assert!(p.is_finite() && p.error_bound > 0.0);
    }

    #[test]
    fn s_infinity_values() {
        let g: SharedModel = Arc::new(GaussModel);
        assert!((s_infinity(&g).unwrap() - 0.5).abs() < 1e-3);
        let f: SharedModel = Arc::new(FiniteModel::uniform(vec![], 3).unwrap());
        assert_eq!(s_infinity(&f).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn bowen_single_branch_is_zero() {
        let g: SharedModel = Arc::new(GaussModel);
        assert_eq!(bowen_dimension(&g, TruncationSpec::new(1, 3).unwrap(), 1e-10).unwrap(), 0.0);
        let m: SharedModel = Arc::new(MpInducedModel::with_cutoff(0.5, 1).unwrap());
        assert_eq!(bowen_dimension(&m, TruncationSpec::new(1, 2).unwrap(), 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn bowen_full_uniform_model_is_one() {
        let f: SharedModel = Arc::new(FiniteModel::uniform(vec![], 3).unwrap());
        let d = bowen_dimension(&f, TruncationSpec::new(3, 1).unwrap(), 1e-12).unwrap();
        assert!((d - 1.0).abs() < 1e-10);
    }
}
