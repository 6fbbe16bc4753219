//! Locally Hölder potentials on the symbolic coding of a model.
//!
//! A potential is a function of a point `x` in a branch `I_a`; the branch
//! symbol is passed along because several potentials (digits, return times)
//! are read off the coding rather than the point.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{LoadedModel, MarkovSystem, MpInducedModel, SharedModel, Symbol};

type PointFn = Arc<dyn Fn(Symbol, f64) -> f64 + Send + Sync>;
type VariationFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;
type ChainFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct Potential {
    name: String,
    eval: PointFn,
    variation: VariationFn,
    chain: Option<ChainFn>,
    derivative_of: Option<SharedModel>,
    lower_bound: f64,
    floor: f64,
    sup_abs: Option<f64>,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("name", &self.name)
            .field("lower_bound", &self.lower_bound)
            .field("floor", &self.floor)
            .finish_non_exhaustive()
    }
}

impl Potential {
    /// A potential given pointwise. `variation(k)` must bound the oscillation
    /// over depth-`k` cylinders.
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(Symbol, f64) -> f64 + Send + Sync + 'static,
        variation: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Potential {
            name: name.into(),
            eval: Arc::new(eval),
            variation: Arc::new(variation),
            chain: None,
            derivative_of: None,
            lower_bound: f64::NEG_INFINITY,
            floor: 0.0,
            sup_abs: None,
        }
    }

    /// A potential that only reads the first symbol of the coding.
    pub fn first_symbol(name: impl Into<String>, value: impl Fn(Symbol) -> f64 + Send + Sync + 'static) -> Self {
        Potential::new(name, move |a, _| value(a), |k| if k == 0 { f64::INFINITY } else { 0.0 })
    }

    pub fn with_lower_bound(mut self, bound: f64) -> Self {
        self.lower_bound = bound;
        self
    }

    /// Declare membership in the class of potentials bounded below by `eta > 0`.
    pub fn with_floor(mut self, eta: f64) -> Self {
        self.floor = eta;
        self.lower_bound = self.lower_bound.max(eta);
        self
    }

    pub fn with_sup_abs(mut self, bound: f64) -> Self {
        self.sup_abs = Some(bound);
        self
    }

    /// Attach a fast path evaluating the potential at `[g_1(z), ..., g_n(z)]`.
    pub fn with_chain(mut self, chain: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.chain = Some(Arc::new(chain));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Value on the cylinder of `word` at the point `x` of that cylinder.
    pub fn evaluate(&self, word: &[Symbol], x: f64) -> f64 {
        (self.eval)(word[0], x)
    }

    pub fn at(&self, symbol: Symbol, x: f64) -> f64 {
        (self.eval)(symbol, x)
    }

    /// Values at `chain[i]`, which must lie in branch `i + 1`.
    pub fn along_chain(&self, chain: &[f64]) -> Vec<f64> {
        match &self.chain {
            Some(f) => f(chain),
            None => chain.iter().enumerate().map(|(i, &x)| (self.eval)(i + 1, x)).collect(),
        }
    }

    pub fn variation_bound(&self, depth: usize) -> f64 {
        (self.variation)(depth)
    }

    /// True when the value depends on the first symbol only.
    pub fn is_first_symbol_only(&self) -> bool {
        self.variation_bound(1) == 0.0
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// `eta` of the class `R_eta`; zero when no positive floor is declared.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn sup_abs(&self) -> Option<f64> {
        self.sup_abs
    }

    /// The model whose `log|T'|` this potential is, if any. Such potentials are
    /// integrated through cylinder length ratios rather than point values.
    pub fn derivative_model(&self) -> Option<&SharedModel> {
        self.derivative_of.as_ref()
    }

    /// Pointwise product, used for the Kac transform `g * tau`.
    pub fn product(&self, other: &Potential, name: impl Into<String>) -> Potential {
        let (f, g) = (self.eval.clone(), other.eval.clone());
        let (vf, vg) = (self.variation.clone(), other.variation.clone());
        let (sf, sg) = (self.sup_abs, other.sup_abs);
        let variation = move |k: usize| {
            let (a, b) = (vf(k), vg(k));
            if a == 0.0 && b == 0.0 {
                return 0.0;
            }
            let part = |sup: Option<f64>, var: f64| if var == 0.0 { 0.0 } else { sup.map_or(f64::INFINITY, |s| s * var) };
            part(sf, b) + part(sg, a) + a * b
        };
        let chain = match (&self.chain, &other.chain) {
            (None, None) => None,
            _ => {
                let (left, right) = (self.clone(), other.clone());
                Some(Arc::new(move |pts: &[f64]| {
                    let (x, y) = (left.along_chain(pts), right.along_chain(pts));
                    x.iter().zip(&y).map(|(a, b)| a * b).collect::<Vec<f64>>()
                }) as ChainFn)
            }
        };
        let lower = if self.lower_bound >= 0.0 && other.lower_bound >= 0.0 {
            self.lower_bound * other.lower_bound
        } else {
            f64::NEG_INFINITY
        };
        Potential {
            name: name.into(),
            eval: Arc::new(move |a, x| f(a, x) * g(a, x)),
            variation: Arc::new(variation),
            chain,
            derivative_of: None,
            lower_bound: lower,
            floor: self.floor * other.floor,
            sup_abs: match (sf, sg) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
        }
    }
}

/// `a -> a`.
pub fn digit() -> Potential {
    Potential::first_symbol("digit", |a| a as f64).with_floor(1.0)
}

/// `a -> log a`.
pub fn log_digit() -> Potential {
    Potential::first_symbol("log-digit", |a| (a as f64).ln()).with_lower_bound(0.0)
}

/// `a -> a^rho`.
pub fn power_digit(rho: f64) -> Potential {
    let p = Potential::first_symbol(format!("power-digit:{rho}"), move |a| (a as f64).powf(rho));
    if rho >= 0.0 {
        p.with_floor(1.0)
    } else {
        p.with_lower_bound(0.0).with_sup_abs(1.0)
    }
}

/// A constant potential.
pub fn constant(c: f64) -> Potential {
    let p = Potential::first_symbol(format!("constant:{c}"), move |_| c).with_lower_bound(c).with_sup_abs(c.abs());
    if c > 0.0 {
        p.with_floor(c)
    } else {
        p
    }
}

/// `log|T'|` of the model.
pub fn log_derivative(model: SharedModel) -> Potential {
    let (m_eval, m_var, m_chain) = (model.clone(), model.clone(), model.clone());
    let mut p = Potential::new("log-derivative", move |a, x| m_eval.log_derivative(a, x), move |k| m_var.log_derivative_variation(k))
        .with_lower_bound(0.0)
        .with_chain(move |pts| m_chain.log_derivative_chain(pts));
    p.derivative_of = Some(model);
    p
}

/// Return time `n(x)` of the induced Manneville-Pomeau system.
pub fn return_time() -> Potential {
    digit().renamed("return-time")
}

/// `x -> sum_{i < n(x)} f(F^i x)`: the observable `f` summed along the return excursion.
pub fn induced_sum(model: Arc<MpInducedModel>, name: impl Into<String>, f: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Potential {
    let (m, g) = (model.clone(), f.clone());
    let eval = move |a: Symbol, x: f64| {
        let mut total = 0.0;
        m.for_each_orbit_point(a, x, |y| total += g(y));
        total
    };
    let chain_f = f.clone();
    let chain = move |pts: &[f64]| {
        // pts[i] = g_{i+1}(z) and F(pts[i]) = pts[i-1]
        let mut out = Vec::with_capacity(pts.len());
        let mut acc = 0.0;
        for &y in pts {
            acc += chain_f(y);
            out.push(acc);
        }
        out
    };
    let var_model = model.clone();
    let var_eval = eval.clone();
    let variation = move |k: usize| sampled_variation(var_model.as_ref(), &var_eval, k);
    let sup = {
        // bounded because f(0) = 0 and the excursion sums converge
        None
    };
    let mut p = Potential::new(name, eval, variation).with_chain(chain);
    p.sup_abs = sup;
    p.with_lower_bound(f64::NEG_INFINITY)
}

/// Largest spread of `eval` over the endpoints and midpoint of sampled
/// depth-`k` cylinders over small symbols. An estimate, used for error bars.
/// Beyond depth 4 the last observed decay ratio is continued.
pub fn sampled_variation(model: &dyn MarkovSystem, eval: &dyn Fn(Symbol, f64) -> f64, depth: usize) -> f64 {
    const DEEPEST: usize = 4;
    match depth {
        0 => f64::INFINITY,
        d if d <= DEEPEST => sampled_spread(model, eval, d),
        d => geometric_extension(sampled_spread(model, eval, DEEPEST - 1), sampled_spread(model, eval, DEEPEST), d - DEEPEST),
    }
}

fn sampled_spread(model: &dyn MarkovSystem, eval: &dyn Fn(Symbol, f64) -> f64, depth: usize) -> f64 {
    let limit = model.alphabet().clamp(6);
    let mut tails = vec![(0.0_f64, 1.0_f64)];
    for _ in 1..depth {
        let mut next = Vec::new();
        for &(u, v) in &tails {
            for a in 1..=limit.min(3) {
                let (gu, gv) = (model.inverse_branch(a, u), model.inverse_branch(a, v));
                next.push((gu.min(gv), gu.max(gv)));
            }
        }
        tails = next;
    }
    let mut worst: f64 = 0.0;
    for &(u, v) in &tails {
        for a in 1..=limit {
            let pts = [u, 0.5 * (u + v), v].map(|y| model.inverse_branch(a, y));
            let vals = pts.map(|x| eval(a, x));
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            worst = worst.max(hi - lo);
        }
    }
    worst
}

/// `last * r^steps` with `r = last / prev` clamped to `[0, 0.9]`.
pub(crate) fn geometric_extension(prev: f64, last: f64, steps: usize) -> f64 {
    let ratio = if prev > 0.0 { (last / prev).clamp(0.0, 0.9) } else { 0.0 };
    last * ratio.powi(steps as i32)
}

/// Observable shipped with the Manneville-Pomeau example: vanishes at the
/// neutral fixed point, is positive near it, negative near `x = 1`, and has
/// positive integral against the absolutely continuous invariant measure.
pub fn mp_observable(x: f64) -> f64 {
    x - 1.2 * x * x
}

/// Named potentials available for a shipped model.
pub fn standard_potentials(model: &LoadedModel) -> BTreeMap<String, Potential> {
    let mut out = BTreeMap::new();
    let shared = model.shared();
    out.insert("log-derivative".to_string(), log_derivative(shared));
    match model {
        LoadedModel::Gauss(_) => {
            for p in [digit(), log_digit()] {
                out.insert(p.name().to_string(), p);
            }
        }
        LoadedModel::Mp(mp) => {
            out.insert("return-time".into(), return_time());
            out.insert("induced-sum".into(), induced_sum(mp.clone(), "induced-sum", Arc::new(mp_observable)));
        }
        LoadedModel::Finite(fm) => {
            for p in [digit(), log_digit()] {
                out.insert(p.name().to_string(), p);
            }
            for name in &fm.spec().columns {
                let values = fm.column(name).expect("column listed in spec");
                let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
                let sup = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                let mut p = Potential::first_symbol(name.clone(), move |a| values[a - 1]).with_lower_bound(lo).with_sup_abs(sup);
                if lo > 0.0 {
                    p = p.with_floor(lo);
                }
                out.insert(name.clone(), p);
            }
        }
    }
    out
}

/// Look up a potential by name, including the parametric families
/// `power-digit:<rho>` and `constant:<c>`.
pub fn potential_by_name(model: &LoadedModel, name: &str) -> Result<Potential> {
    let unknown = || Error::UnknownPotential { name: name.to_string(), model: model.id() };
    if let Some(rho) = name.strip_prefix("power-digit:") {
        if matches!(model, LoadedModel::Mp(_)) {
            return Err(unknown());
        }
        return rho.parse::<f64>().map(power_digit).map_err(|_| unknown());
    }
    if let Some(c) = name.strip_prefix("constant:") {
        return c.parse::<f64>().map(constant).map_err(|_| unknown());
    }
    standard_potentials(model).remove(name).ok_or_else(unknown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{model_from_id, GaussModel};

    #[test]
    fn digit_family_values() {
        assert_eq!(digit().evaluate(&[5], 0.1), 5.0);
        assert!((log_digit().evaluate(&[3], 0.2) - 1.098612).abs() < 1e-6);
        assert_eq!(power_digit(0.5).evaluate(&[4], 0.2), 2.0);
    }

    #[test]
    fn digit_family_depends_on_first_symbol_only() {
        for p in [digit(), log_digit(), power_digit(0.5), power_digit(2.0)] {
            for k in 1..8 {
                assert_eq!(p.variation_bound(k), 0.0);
            }
            assert!(p.is_first_symbol_only());
        }
    }

    #[test]
    fn floors() {
        assert_eq!(digit().floor(), 1.0);
        assert_eq!(log_digit().floor(), 0.0);
        assert_eq!(power_digit(0.7).floor(), 1.0);
    }

    #[test]
    fn product_of_digits_is_square() {
        let sq = digit().product(&digit(), "sq");
        assert_eq!(sq.evaluate(&[7, 1], 0.3), 49.0);
        assert_eq!(sq.variation_bound(3), 0.0);
    }

    #[test]
    fn log_derivative_potential_is_flagged() {
        let p = log_derivative(Arc::new(GaussModel));
        assert!(p.derivative_model().is_some());
        assert!(!p.is_first_symbol_only());
        assert!((p.evaluate(&[1], 0.5) - 2.0 * 2.0_f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn induced_sum_chain_matches_pointwise() {
        let mp = Arc::new(MpInducedModel::new(0.5).unwrap());
        let p = induced_sum(mp.clone(), "phi", Arc::new(mp_observable));
        let chain = mp.branch_images(0.3, 30);
        let fast = p.along_chain(&chain);
        for (i, &x) in chain.iter().enumerate() {
            let slow = p.at(i + 1, x);
            assert!((fast[i] - slow).abs() < 1e-10, "branch {}: {} vs {}", i + 1, fast[i], slow);
        }
    }

    #[test]
    fn lookup_by_name() {
        let g = model_from_id("gauss").unwrap();
        assert_eq!(potential_by_name(&g, "power-digit:0.5").unwrap().evaluate(&[9], 0.0), 3.0);
        assert!(matches!(potential_by_name(&g, "return-time"), Err(Error::UnknownPotential { .. })));
        let mp = model_from_id("mp:0.5").unwrap();
        assert!(potential_by_name(&mp, "induced-sum").is_ok());
        assert!(potential_by_name(&mp, "digit").is_err());
    }
}
