//! Brute-force reference computations shared by the integration tests.
//!
//! Nothing here touches the transfer-operator engine: pressure comes from
//! sums over periodic orbits and spectra from direct maximization over
//! Markov measures.

#![allow(dead_code)]

use std::sync::Arc;

use emr_multifractal::model::{FiniteModel, MarkovSystem, SharedModel, Symbol};
use emr_multifractal::potential::Potential;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const ORACLE_BUDGET: u64 = 10_000_000;

/// Fixed point of `g_{w_1} ∘ ... ∘ g_{w_m}`.
pub fn orbit_point(model: &dyn MarkovSystem, word: &[Symbol]) -> f64 {
    let mut x = 0.5;
    for _ in 0..100_000 {
        let next = word.iter().rev().fold(x, |y, &a| model.inverse_branch(a, y));
        if (next - x).abs() <= 2.0 * f64::EPSILON * next.abs() {
            return next;
        }
        x = next;
    }
    x
}

/// `Σ_i c_i S_m p_i` along the periodic orbit coded by `word`.
pub fn orbit_sum(model: &dyn MarkovSystem, terms: &[(Potential, f64)], word: &[Symbol]) -> f64 {
    let m = word.len();
    let mut total = 0.0;
    let mut rotated = word.to_vec();
    for _ in 0..m {
        let x = orbit_point(model, &rotated);
        for (p, c) in terms {
            if *c != 0.0 {
                total += c * p.evaluate(&rotated, x);
            }
        }
        rotated.rotate_left(1);
    }
    total
}

/// `(1/m) log Σ_{σ^m x = x} exp(S_m Φ(x))` over the alphabet `{1..n}`.
pub fn oracle_pressure(model: &dyn MarkovSystem, terms: &[(Potential, f64)], n: usize, m: usize) -> f64 {
    let count = (n as u128).pow(m as u32);
    assert!(count <= ORACLE_BUDGET as u128, "oracle budget exceeded: {n}^{m}");
    let mut word = vec![1; m];
    let mut sums = Vec::with_capacity(count as usize);
    loop {
        sums.push(orbit_sum(model, terms, &word));
        let mut i = m;
        loop {
            if i == 0 {
                let top = sums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let total: f64 = sums.iter().map(|s| (s - top).exp()).sum();
                return (top + total.ln()) / m as f64;
            }
            i -= 1;
            if word[i] < n {
                word[i] += 1;
                word[i + 1..].iter_mut().for_each(|a| *a = 1);
                break;
            }
        }
    }
}

/// Extrapolate `f(m) = a + b/m + c/m^2 + ...` to `m → ∞` through the given samples.
pub fn extrapolate(ms: &[f64], values: &[f64]) -> f64 {
    // Neville's scheme in the variable 1/m, evaluated at 0
    let x: Vec<f64> = ms.iter().map(|m| 1.0 / m).collect();
    let mut p = values.to_vec();
    for level in 1..p.len() {
        for i in 0..p.len() - level {
            p[i] = (x[i + level] * p[i] - x[i] * p[i + 1]) / (x[i + level] - x[i]);
        }
    }
    p[0]
}

/// A finite full-branch model together with one-step potential values.
pub struct SmallModel {
    pub model: Arc<FiniteModel>,
    /// `-log |I_a|`
    pub lambda: Vec<f64>,
}

impl SmallModel {
    pub fn new(widths: &[f64], columns: Vec<(String, Vec<f64>)>) -> Self {
        let mut left = 0.0;
        let total: f64 = widths.iter().sum();
        assert!(total <= 1.0 + 1e-12);
        let gap = (1.0 - total) / widths.len() as f64;
        let branches = widths
            .iter()
            .map(|w| {
                let b = (left, left + w);
                left += w + gap;
                b
            })
            .collect();
        let model = Arc::new(FiniteModel::with_branches(branches, columns).unwrap());
        SmallModel { lambda: widths.iter().map(|w| -w.ln()).collect(), model }
    }

    pub fn shared(&self) -> SharedModel {
        self.model.clone()
    }

    pub fn column(&self, name: &str) -> Potential {
        let values = self.model.column(name).unwrap();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let p = Potential::first_symbol(name, move |a| values[a - 1]).with_lower_bound(lo);
        if lo > 0.0 {
            p.with_floor(lo)
        } else {
            p
        }
    }
}

/// Random finite model with `symbols` branches and one-step columns `phi`, `psi` (`psi ≥ 0.5`).
pub fn random_model(rng: &mut ChaCha8Rng, symbols: usize) -> SmallModel {
    let raw: Vec<f64> = (0..symbols).map(|_| rng.gen_range(0.2..1.0)).collect();
    let scale = rng.gen_range(0.5..0.95) / raw.iter().sum::<f64>();
    let widths: Vec<f64> = raw.iter().map(|w| w * scale).collect();
    let phi: Vec<f64> = (0..symbols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let psi: Vec<f64> = (0..symbols).map(|_| rng.gen_range(0.5..2.0)).collect();
    SmallModel::new(&widths, vec![("phi".into(), phi), ("psi".into(), psi)])
}

/// A Markov measure with memory `order` on `symbols` letters, parametrized by
/// softmax logits for each transition out of an `order`-word state.
struct MarkovFamily<'a> {
    symbols: usize,
    order: usize,
    states: usize,
    phi: &'a [f64],
    psi: &'a [f64],
    lambda: &'a [f64],
    alpha: f64,
}

struct MarkovValues {
    entropy: f64,
    lyapunov: f64,
    constraint: f64,
}

impl MarkovFamily<'_> {
    fn transitions(&self, theta: &[f64]) -> Vec<f64> {
        let k = self.symbols;
        let mut p = vec![0.0; self.states * k];
        for s in 0..self.states {
            let row = &theta[s * k..(s + 1) * k];
            let top = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let z: f64 = row.iter().map(|t| (t - top).exp()).sum();
            for b in 0..k {
                p[s * k + b] = (row[b] - top).exp() / z;
            }
        }
        p
    }

    fn next_state(&self, s: usize, b: usize) -> usize {
        if self.order == 0 {
            0
        } else {
            (s * self.symbols + b) % self.states
        }
    }

    fn evaluate(&self, theta: &[f64]) -> MarkovValues {
        let k = self.symbols;
        let p = self.transitions(theta);
        let mut pi = vec![1.0 / self.states as f64; self.states];
        for _ in 0..20_000 {
            let mut next = vec![0.0; self.states];
            for s in 0..self.states {
                for b in 0..k {
                    next[self.next_state(s, b)] += pi[s] * p[s * k + b];
                }
            }
            let diff: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
            pi = next;
            if diff < 1e-15 {
                break;
            }
        }
        let (mut h, mut lyap, mut num, mut den) = (0.0, 0.0, 0.0, 0.0);
        for s in 0..self.states {
            for b in 0..k {
                let w = pi[s] * p[s * k + b];
                if w > 0.0 {
                    h -= w * p[s * k + b].ln();
                }
                lyap += w * self.lambda[b];
                num += w * self.phi[b];
                den += w * self.psi[b];
            }
        }
        MarkovValues { entropy: h, lyapunov: lyap, constraint: num - self.alpha * den }
    }

    fn gradient(&self, theta: &[f64], f: impl Fn(&MarkovValues) -> f64) -> Vec<f64> {
        let mut g = vec![0.0; theta.len()];
        let mut t = theta.to_vec();
        for i in 0..theta.len() {
            let h = 1e-6;
            t[i] = theta[i] + h;
            let up = f(&self.evaluate(&t));
            t[i] = theta[i] - h;
            let down = f(&self.evaluate(&t));
            t[i] = theta[i];
            g[i] = (up - down) / (2.0 * h);
        }
        g
    }

    /// Move back onto `∫(φ - αψ) = 0` by Newton steps along the constraint gradient.
    fn restore(&self, theta: &mut [f64]) -> bool {
        for _ in 0..100 {
            let c = self.evaluate(theta).constraint;
            if c.abs() < 1e-13 {
                return true;
            }
            let a = self.gradient(theta, |v| v.constraint);
            let norm: f64 = a.iter().map(|x| x * x).sum();
            if norm < 1e-300 {
                return false;
            }
            for (t, ai) in theta.iter_mut().zip(&a) {
                *t -= c * ai / norm;
            }
            if theta.iter().any(|t| t.abs() > 60.0) {
                return false;
            }
        }
        self.evaluate(theta).constraint.abs() < 1e-10
    }
}

/// Lower bound for `b(α)` on a finite linear model with one-step potentials:
/// the best `h/λ` found over Markov measures of memory `order` satisfying
/// `∫φ = α ∫ψ`, by constraint-projected gradient ascent from 20 seeded starts.
/// Returns `None` when no start reaches the constraint surface.
pub fn oracle_spectrum(phi: &[f64], psi: &[f64], lambda: &[f64], alpha: f64, order: usize, seed: u64) -> Option<f64> {
    let symbols = phi.len();
    let family = MarkovFamily { symbols, order, states: symbols.pow(order as u32), phi, psi, lambda, alpha };
    let dim = family.states * symbols;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let objective = |v: &MarkovValues| v.entropy / v.lyapunov;
    let mut best: Option<f64> = None;
    for _ in 0..20 {
        let mut theta: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if !family.restore(&mut theta) {
            continue;
        }
        let mut value = objective(&family.evaluate(&theta));
        let mut step = 0.5;
        for _ in 0..400 {
            let g = family.gradient(&theta, objective);
            let a = family.gradient(&theta, |v| v.constraint);
            let aa: f64 = a.iter().map(|x| x * x).sum();
            let ga: f64 = g.iter().zip(&a).map(|(x, y)| x * y).sum();
            let d: Vec<f64> = g.iter().zip(&a).map(|(gi, ai)| gi - ga / aa.max(1e-300) * ai).collect();
            let dn: f64 = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            if dn < 1e-10 {
                break;
            }
            let mut accepted = false;
            while step > 1e-10 {
                let mut trial: Vec<f64> = theta.iter().zip(&d).map(|(t, di)| t + step * di / dn).collect();
                if family.restore(&mut trial) {
                    let v = objective(&family.evaluate(&trial));
                    if v > value {
                        theta = trial;
                        value = v;
                        accepted = true;
                        step *= 1.5;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        best = Some(best.map_or(value, |b: f64| b.max(value)));
    }
    best
}

/// Binary entropy in nats.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    term(p) + term(1.0 - p)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
