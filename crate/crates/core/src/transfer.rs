//! Depth-`k` transfer matrices on truncated systems and their Perron data.
//!
//! States are depth-`(k-1)` words over `{1..n}`, indexed most significant
//! symbol first. The depth-`k` word `w = s b` moves state `s` to the state
//! formed by dropping the first symbol of `w`, with weight `exp` of the
//! potential combination on `w`.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::cylinder::TruncationSpec;
use crate::error::{Error, Result};
use crate::model::{SharedModel, Symbol};
use crate::potential::Potential;

/// Name of the always-present column holding `log|T'|`.
pub const LOG_DERIVATIVE: &str = "log-derivative";

#[derive(Debug, Clone)]
enum ColumnData {
    /// Value per first symbol (length `n`).
    FirstSymbol(Vec<f64>),
    /// Value per depth-`k` word (length `n^k`).
    Full(Vec<f64>),
}

#[derive(Debug, Clone)]
struct Column {
    name: String,
    data: ColumnData,
    variation: f64,
}

/// Potential values on every depth-`k` cylinder of a truncation.
///
/// Column 0 is always `log|T'|`, taken in mean-value form
/// `log(|I(σw)| / |I(w)|)` so that its Birkhoff sums telescope to cylinder
/// lengths; every other potential is evaluated at the representative point.
#[derive(Debug, Clone)]
pub struct CylinderTable {
    model_id: String,
    spec: TruncationSpec,
    columns: Vec<Column>,
}

impl CylinderTable {
    pub fn build(model: &SharedModel, potentials: &[Potential], spec: TruncationSpec) -> Result<Self> {
        if let Some(limit) = model.alphabet().limit() {
            if spec.cutoff > limit {
                return Err(Error::EmptyBranch { symbol: spec.cutoff, available: limit });
            }
        }
        let words = spec.check_budget()?;
        let (n, k) = (spec.cutoff, spec.depth);
        let mut extra: Vec<&Potential> = Vec::new();
        for p in potentials {
            if p.derivative_model().is_none() && !extra.iter().any(|q| q.name() == p.name()) {
                if p.name() == LOG_DERIVATIVE {
                    return Err(Error::InvalidParameter(format!("potential name `{LOG_DERIVATIVE}` is reserved")));
                }
                extra.push(p);
            }
        }

        // Endpoints (g_t(0), g_t(1)) of every depth-(k-1) suffix t.
        let mut ends: Vec<(f64, f64)> = vec![(0.0, 1.0)];
        for _ in 1..k {
            let mut next = vec![(0.0, 0.0); ends.len() * n];
            let stride = ends.len();
            for (t, &(u, v)) in ends.iter().enumerate() {
                let (iu, iv) = (model.branch_images(u, n), model.branch_images(v, n));
                for a in 0..n {
                    next[a * stride + t] = (iu[a], iv[a]);
                }
            }
            ends = next;
        }
        let stride = ends.len();

        let mut log_der = vec![0.0; words];
        let first_only: Vec<bool> = extra.iter().map(|p| k == 1 || p.is_first_symbol_only()).collect();
        let mut full: Vec<Vec<f64>> = first_only.iter().map(|&f| if f { Vec::new() } else { vec![0.0; words] }).collect();
        let mut first: Vec<Vec<f64>> = vec![Vec::new(); extra.len()];
        for (t, &(u, v)) in ends.iter().enumerate() {
            let (iu, iv) = (model.branch_images(u, n), model.branch_images(v, n));
            for a in 0..n {
                log_der[a * stride + t] = model.cylinder_log_derivative(a + 1, u, v, iu[a], iv[a]);
            }
            for (j, p) in extra.iter().enumerate() {
                if first_only[j] {
                    if t == 0 {
                        first[j] = p.along_chain(&iv);
                    }
                } else {
                    for (a, value) in p.along_chain(&iv).into_iter().enumerate() {
                        full[j][a * stride + t] = value;
                    }
                }
            }
        }

        let mut columns = Vec::with_capacity(extra.len() + 1);
        let log_der_data = if k == 1 { ColumnData::FirstSymbol(log_der) } else { ColumnData::Full(log_der) };
        columns.push(Column { name: LOG_DERIVATIVE.to_string(), data: log_der_data, variation: model.log_derivative_variation(k) });
        for (j, p) in extra.iter().enumerate() {
            let data = if first_only[j] { ColumnData::FirstSymbol(std::mem::take(&mut first[j])) } else { ColumnData::Full(std::mem::take(&mut full[j])) };
            let values: &[f64] = match &data {
                ColumnData::FirstSymbol(v) | ColumnData::Full(v) => v,
            };
            if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!("potential `{}` is not finite on cylinder {bad}", p.name())));
            }
            columns.push(Column { name: p.name().to_string(), data, variation: p.variation_bound(k) });
        }
        Ok(CylinderTable { model_id: model.id(), spec, columns })
    }

    pub fn model_id(&self) -> &str {
        &self.model_id
    }

    pub fn spec(&self) -> TruncationSpec {
        self.spec
    }

    pub fn cutoff(&self) -> usize {
        self.spec.cutoff
    }

    pub fn depth(&self) -> usize {
        self.spec.depth
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Index of the column for `potential` (the derivative cocycle maps to column 0).
    pub fn index_of(&self, potential: &Potential) -> Result<usize> {
        if potential.derivative_model().is_some() {
            return Ok(0);
        }
        self.column_index(potential.name())
            .ok_or_else(|| Error::UnknownPotential { name: potential.name().to_string(), model: self.model_id.clone() })
    }

    /// Value of column `j` on the depth-`k` word with index `w`.
    pub fn value(&self, column: usize, word: usize) -> f64 {
        let stride = self.stride();
        match &self.columns[column].data {
            ColumnData::FirstSymbol(v) => v[word / stride],
            ColumnData::Full(v) => v[word],
        }
    }

    /// Value of column `j` on the explicit word.
    pub fn value_on(&self, column: usize, word: &[Symbol]) -> f64 {
        let n = self.spec.cutoff;
        let idx = word.iter().fold(0usize, |acc, &a| acc * n + (a - 1));
        self.value(column, idx)
    }

    /// `sum |c_i| var_k(p_i)`: the depth-`k` error bar of the combination.
    pub fn error_bound(&self, coeffs: &[f64]) -> f64 {
        coeffs
            .iter()
            .zip(&self.columns)
            .filter(|(c, _)| **c != 0.0)
            .map(|(c, col)| c.abs() * col.variation)
            .sum()
    }

    fn stride(&self) -> usize {
        self.spec.cutoff.pow(self.spec.depth as u32 - 1)
    }

    fn words(&self) -> usize {
        self.spec.cutoff.pow(self.spec.depth as u32)
    }

    fn is_full(&self, column: usize) -> bool {
        matches!(self.columns[column].data, ColumnData::Full(_))
    }
}

/// Entropy, Lyapunov exponent and potential integrals of an equilibrium state.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumStats {
    pub pressure: f64,
    /// `h` from the Markov transition probabilities.
    pub entropy: f64,
    /// `P - sum c_i ∫ p_i`.
    pub entropy_from_pressure: f64,
    pub lyapunov: f64,
    pub integrals: BTreeMap<String, f64>,
    /// Integrals in table column order; `values[j] = ∂P/∂c_j`.
    pub values: Vec<f64>,
}

impl EquilibriumStats {
    pub fn integral(&self, name: &str) -> Option<f64> {
        self.integrals.get(name).copied()
    }

    /// `h / λ`, the dimension of the measure.
    pub fn dimension(&self) -> f64 {
        self.entropy / self.lyapunov
    }
}

/// Tolerances of the power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSettings {
    /// Relative change of successive eigenvalue estimates at convergence.
    pub tol: f64,
    /// Relative sup-norm change of successive normalized vectors at convergence.
    pub vector_tol: f64,
    pub max_iter: usize,
    /// Allowed `|h - (P - sum c_i ∫p_i)|`, relative to `1 + sum |c_i ∫p_i|`.
    pub entropy_tol: f64,
}

impl Default for EigenSettings {
    fn default() -> Self {
        EigenSettings { tol: 1e-13, vector_tol: 1e-11, max_iter: 100_000, entropy_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
struct Kernel {
    key: Vec<f64>,
    /// `exp(E[s, b] - row_max[s])`, where `E` is the full-column exponent.
    weights: Vec<f64>,
    /// `max_b E[s, b]` for each state `s`.
    row_max: Vec<f64>,
}

/// Power iteration on the transfer matrix of a `CylinderTable`.
///
/// Caches the exponentiated full-column part of the weights between calls
/// and warm-starts from the previous eigenvectors. Clone one engine per worker.
#[derive(Debug, Clone)]
pub struct PressureEngine {
    table: Arc<CylinderTable>,
    settings: EigenSettings,
    kernel: Option<Kernel>,
    right: Option<Vec<f64>>,
    left: Option<Vec<f64>>,
}

struct Weights<'a> {
    /// Normalized first-symbol weights (used alone when the matrix has rank one).
    row: Vec<f64>,
    /// Per-state factors `exp(R[first(s)] + row_max[s] - shift)` when a kernel is present.
    state: Vec<f64>,
    kernel: Option<&'a Kernel>,
    shift: f64,
}

impl PressureEngine {
    pub fn new(table: Arc<CylinderTable>) -> Self {
        PressureEngine { table, settings: EigenSettings::default(), kernel: None, right: None, left: None }
    }

    pub fn with_settings(mut self, settings: EigenSettings) -> Self {
        self.settings = settings;
        self
    }

    pub fn table(&self) -> &Arc<CylinderTable> {
        &self.table
    }

    pub fn settings(&self) -> EigenSettings {
        self.settings
    }

    /// Forget the warm-start vectors.
    pub fn reset(&mut self) {
        self.right = None;
        self.left = None;
    }

    fn check(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.table.width() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a table with {} columns",
                coeffs.len(),
                self.table.width()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("combination coefficients must be finite".into()));
        }
        Ok(())
    }

    fn weights(&mut self, coeffs: &[f64]) -> Weights<'_> {
        let t = &self.table;
        let n = t.cutoff();
        let mut row = vec![0.0; n];
        let mut key = vec![0.0; t.width()];
        for (j, col) in t.columns.iter().enumerate() {
            match &col.data {
                ColumnData::FirstSymbol(v) if coeffs[j] != 0.0 => row.iter_mut().zip(v).for_each(|(r, x)| *r += coeffs[j] * x),
                ColumnData::Full(_) => key[j] = coeffs[j],
                _ => {}
            }
        }
        if t.depth() == 1 || key.iter().all(|&c| c == 0.0) {
            let row_shift = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            row.iter_mut().for_each(|r| *r = (*r - row_shift).exp());
            return Weights { row, state: Vec::new(), kernel: None, shift: row_shift };
        }
        if self.kernel.as_ref().is_none_or(|k| k.key != key) {
            let words = t.words();
            let mut exponent = vec![0.0; words];
            for (j, &c) in key.iter().enumerate() {
                if c != 0.0 && t.is_full(j) {
                    if let ColumnData::Full(v) = &t.columns[j].data {
                        exponent.par_iter_mut().zip(v.par_iter()).for_each(|(e, x)| *e += c * x);
                    }
                }
            }
            let row_max: Vec<f64> = exponent.par_chunks_mut(n).map(|chunk| {
                let top = chunk.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                chunk.iter_mut().for_each(|e| *e = (*e - top).exp());
                top
            }).collect();
            self.kernel = Some(Kernel { key, weights: exponent, row_max });
        }
        let kernel = self.kernel.as_ref().expect("kernel just built");
        let m = (t.stride() / n).max(1);
        let mut state: Vec<f64> = kernel.row_max.iter().enumerate().map(|(s, top)| row[s / m] + top).collect();
        let shift = state.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        state.iter_mut().for_each(|e| *e = (*e - shift).exp());
        Weights { row, state, kernel: Some(kernel), shift }
    }

    /// Log of the leading eigenvalue of the transfer matrix: the truncated pressure.
    pub fn log_eigenvalue(&mut self, coeffs: &[f64]) -> Result<f64> {
        self.check(coeffs)?;
        let settings = self.settings;
        let n = self.table.cutoff();
        let stride = self.table.stride();
        let warm = self.right.take();
        let w = self.weights(coeffs);
        let Some(kernel) = w.kernel else {
            // Weights depend on the first symbol only: the matrix has rank one.
            let total: f64 = w.row.iter().sum();
            return Ok(total.ln() + w.shift);
        };
        let shift = w.shift;
        let (rho, right) = power_iteration(warm, stride, settings, |x, y| right_apply(&w.state, &kernel.weights, n, x, y))?;
        self.right = Some(right);
        Ok(rho.ln() + shift)
    }

    /// Pressure together with the equilibrium state's statistics.
    pub fn equilibrium(&mut self, coeffs: &[f64]) -> Result<EquilibriumStats> {
        self.check(coeffs)?;
        let settings = self.settings;
        let n = self.table.cutoff();
        let stride = self.table.stride();
        let (warm_r, warm_l) = (self.right.take(), self.left.take());
        let table = self.table.clone();
        let w = self.weights(coeffs);
        let width = table.width();
        let mut values = vec![0.0; width];

        let (pressure, entropy, right, left) = match w.kernel {
            None => {
                // Bernoulli measure with p_a proportional to the row weights.
                let total: f64 = w.row.iter().sum();
                let p: Vec<f64> = w.row.iter().map(|r| r / total).collect();
                let entropy = -p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>();
                for (j, col) in table.columns.iter().enumerate() {
                    values[j] = match &col.data {
                        ColumnData::FirstSymbol(v) => p.iter().zip(v).map(|(a, b)| a * b).sum(),
                        ColumnData::Full(v) => {
                            // product measure on words: weight of w is prod p_(a_i)
                            let mut acc = 0.0;
                            for (idx, x) in v.iter().enumerate() {
                                let mut mass = 1.0;
                                let mut rest = idx;
                                for _ in 0..table.depth() {
                                    mass *= p[rest % n];
                                    rest /= n;
                                }
                                acc += mass * x;
                            }
                            acc
                        }
                    };
                }
                (total.ln() + w.shift, entropy, None, None)
            }
            Some(kernel) => {
                let (rho, r) = power_iteration(warm_r, stride, settings, |x, y| right_apply(&w.state, &kernel.weights, n, x, y))?;
                let (rho_l, l) = power_iteration(warm_l, stride, settings, |x, y| left_apply(&w.state, &kernel.weights, n, x, y))?;
                if ((rho - rho_l) / rho).abs() > 1e-9 {
                    return Err(Error::EigenNotConverged { iterations: settings.max_iter, last_change: (rho - rho_l).abs() / rho });
                }
                let m = (stride / n).max(1);
                let norm: f64 = l.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>() * rho;
                let log_rho = rho.ln();
                let log_r: Vec<f64> = r.iter().map(|v| v.ln()).collect();
                let log_state: Vec<f64> = w.state.iter().map(|v| v.ln()).collect();
                // log K is recovered from the full columns instead of taking logs of the kernel
                let full: Vec<(usize, &[f64])> = table
                    .columns
                    .iter()
                    .enumerate()
                    .filter_map(|(j, col)| match &col.data {
                        ColumnData::Full(v) => Some((j, v.as_slice())),
                        _ => None,
                    })
                    .collect();
                let mut full_integrals = vec![0.0; full.len()];
                let mut first_mass = vec![0.0; n];
                let mut entropy = 0.0;
                for s in 0..stride {
                    let ls = l[s] / norm;
                    let a = s / m;
                    if ls == 0.0 || w.state[s] == 0.0 || r[s] == 0.0 {
                        continue;
                    }
                    let base = (s % m) * n;
                    let lead = log_state[s] - kernel.row_max[s] - log_rho - log_r[s];
                    let mut state_mass = 0.0;
                    for b in 0..n {
                        let idx = s * n + b;
                        let mass = ls * w.state[s] * kernel.weights[idx] * r[base + b];
                        if mass > 0.0 {
                            state_mass += mass;
                            let mut log_k = 0.0;
                            for (f, &(j, v)) in full.iter().enumerate() {
                                full_integrals[f] += mass * v[idx];
                                log_k += coeffs[j] * v[idx];
                            }
                            entropy -= mass * (lead + log_k + log_r[base + b]);
                        }
                    }
                    first_mass[a] += state_mass;
                }
                for (f, &(j, _)) in full.iter().enumerate() {
                    values[j] = full_integrals[f];
                }
                for (j, col) in table.columns.iter().enumerate() {
                    if let ColumnData::FirstSymbol(v) = &col.data {
                        values[j] = first_mass.iter().zip(v).map(|(a, b)| a * b).sum();
                    }
                }
                (rho.ln() + w.shift, entropy, Some(r), Some(l))
            }
        };
        if right.is_some() {
            self.right = right;
            self.left = left;
        }
        let linear: f64 = coeffs.iter().zip(&values).map(|(c, v)| c * v).sum();
        let scale: f64 = 1.0 + coeffs.iter().zip(&values).map(|(c, v)| (c * v).abs()).sum::<f64>();
        let from_pressure = pressure - linear;
        if (entropy - from_pressure).abs() > settings.entropy_tol * scale {
            return Err(Error::EntropyMismatch { direct: entropy, from_pressure });
        }
        let integrals = table.columns.iter().zip(&values).map(|(c, v)| (c.name.clone(), *v)).collect();
        Ok(EquilibriumStats { pressure, entropy, entropy_from_pressure: from_pressure, lyapunov: values[0], integrals, values })
    }
}

const PARALLEL_STATES: usize = 1 << 14;

/// `y[s] = state[s] * sum_b K[s n + b] x[(s mod m) n + b]`.
fn right_apply(state: &[f64], kernel: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    let states = y.len();
    let m = (states / n).max(1);
    let body = |s: usize| -> f64 {
        let base = (s % m) * n;
        let k = &kernel[s * n..s * n + n];
        let xs = &x[base..base + n];
        let dot: f64 = k.iter().zip(xs).map(|(a, b)| a * b).sum();
        state[s] * dot
    };
    if states >= PARALLEL_STATES {
        y.par_iter_mut().enumerate().for_each(|(s, out)| *out = body(s));
    } else {
        y.iter_mut().enumerate().for_each(|(s, out)| *out = body(s));
    }
}

/// Transpose of `right_apply`.
fn left_apply(state: &[f64], kernel: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    let states = y.len();
    let m = (states / n).max(1);
    y.iter_mut().for_each(|v| *v = 0.0);
    for s in 0..states {
        let scale = x[s] * state[s];
        if scale == 0.0 {
            continue;
        }
        let base = (s % m) * n;
        let k = &kernel[s * n..s * n + n];
        y[base..base + n].iter_mut().zip(k).for_each(|(out, w)| *out += scale * w);
    }
}

/// Leading eigenpair of a nonnegative operator by sup-normalized power iteration.
fn power_iteration(
    warm: Option<Vec<f64>>,
    size: usize,
    settings: EigenSettings,
    mut apply: impl FnMut(&[f64], &mut [f64]),
) -> Result<(f64, Vec<f64>)> {
    let mut cold = false;
    let mut x = match warm {
        Some(v) if v.len() == size && v.iter().all(|a| a.is_finite() && *a >= 0.0) && v.iter().any(|a| *a > 0.0) => v,
        _ => {
            cold = true;
            vec![1.0; size]
        }
    };
    let mut y = vec![0.0; size];
    let mut previous = f64::NAN;
    let mut change = f64::INFINITY;
    for iter in 0..settings.max_iter {
        apply(&x, &mut y);
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        let rho = sy / sx;
        let top = y.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0 && top.is_finite()) {
            if !cold {
                // the warm vector lives where the new matrix vanishes: start over
                cold = true;
                x.iter_mut().for_each(|a| *a = 1.0);
                previous = f64::NAN;
                continue;
            }
            return Err(Error::EigenNotConverged { iterations: iter, last_change: f64::NAN });
        }
        let mut vec_change: f64 = 0.0;
        for (a, b) in x.iter_mut().zip(&y) {
            let v = b / top;
            vec_change = vec_change.max((v - *a).abs());
            *a = v;
        }
        change = ((rho - previous) / rho).abs();
        previous = rho;
        if change <= settings.tol && vec_change <= settings.vector_tol {
            return Ok((rho, x));
        }
    }
    Err(Error::EigenNotConverged { iterations: settings.max_iter, last_change: change })
}
