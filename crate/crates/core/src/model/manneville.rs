use std::sync::RwLock;

use super::{newton_decreasing, Alphabet, MarkovSystem, Symbol};
use crate::error::{Error, Result};

/// First-return map of the Manneville-Pomeau map `F(x) = x + x^(1+beta) mod 1`
/// to the whole interval, partitioned by return time.
///
/// With `t + t^(1+beta) = 1` the branches are `I_1 = [t, 1]` and
/// `I_n = [x_n, x_(n-1)]` where `x_0 = 1`, `x_1 = t` and `x_(j+1)` is the
/// left-branch preimage of `x_j`. On `I_n` the induced map is `F^n`. Branch
/// boundaries are materialized on first use.
#[derive(Debug)]
pub struct MpInducedModel {
    beta: f64,
    t: f64,
    cutoff: Option<usize>,
    boundaries: RwLock<Vec<f64>>,
}

impl MpInducedModel {
    /// The full (countable) induced system.
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
        }
        let t = newton_decreasing(1.0, |x| (x + x.powf(1.0 + beta) - 1.0, 1.0 + (1.0 + beta) * x.powf(beta)));
        Ok(MpInducedModel { beta, t, cutoff: None, boundaries: RwLock::new(vec![1.0, t]) })
    }

    /// The induced system restricted to return times `1..=branch_cutoff`.
    pub fn with_cutoff(beta: f64, branch_cutoff: usize) -> Result<Self> {
        if branch_cutoff == 0 {
            return Err(Error::InvalidParameter("branch cutoff must be at least 1".into()));
        }
        let mut model = Self::new(beta)?;
        model.cutoff = Some(branch_cutoff);
        Ok(model)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The point `t` with `t + t^(1+beta) = 1`.
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `F` without the reduction mod 1.
    pub fn lift(&self, x: f64) -> f64 {
        x + x.powf(1.0 + self.beta)
    }

    /// `F'(x)`.
    pub fn map_derivative(&self, x: f64) -> f64 {
        1.0 + (1.0 + self.beta) * x.powf(self.beta)
    }

    /// Preimage of `y` under the left branch `F|[0, t]`.
    pub fn left_preimage(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let b = self.beta;
        newton_decreasing(y, |x| (x + x.powf(1.0 + b) - y, 1.0 + (1.0 + b) * x.powf(b)))
    }

    /// Preimage of `y` under the right branch `F|[t, 1]` (taken mod 1).
    pub fn right_preimage(&self, y: f64) -> f64 {
        let b = self.beta;
        newton_decreasing(1.0, |x| (x + x.powf(1.0 + b) - 1.0 - y, 1.0 + (1.0 + b) * x.powf(b)))
    }

    /// `x_j`: left endpoint of `I_j` (with `x_0 = 1`).
    pub fn boundary(&self, j: usize) -> f64 {
        {
            let cache = self.boundaries.read().expect("boundary cache poisoned");
            if j < cache.len() {
                return cache[j];
            }
        }
        let mut cache = self.boundaries.write().expect("boundary cache poisoned");
        while cache.len() <= j {
            let last = *cache.last().expect("cache starts non-empty");
            cache.push(self.left_preimage(last));
        }
        cache[j]
    }

    /// Visit the `symbol` points of the return orbit of `x`, i.e. `F^i(x)` for `i < symbol`.
    pub fn for_each_orbit_point(&self, symbol: Symbol, x: f64, mut visit: impl FnMut(f64)) {
        let mut y = x;
        for i in 0..symbol {
            visit(y);
            if i + 1 < symbol {
                y = self.lift(y);
            }
        }
    }
}

/// Deepest cylinder level sampled by the variation estimates; deeper levels
/// continue the last observed decay ratio.
const SAMPLED_DEPTH: usize = 6;

impl MpInducedModel {
    fn sampled_log_derivative_variation(&self, depth: usize) -> f64 {
        let mut probes: Vec<Symbol> = vec![1, 2, 3, 4, 6, 8, 16, 32, 64];
        if let Some(n) = self.cutoff {
            probes.retain(|&a| a <= n);
        }
        let mut tails = vec![(0.0_f64, 1.0_f64)];
        for _ in 1..depth {
            let mut next = Vec::with_capacity(tails.len() * 3);
            for &(u, v) in &tails {
                for &a in probes.iter().take(3) {
                    let (gu, gv) = (self.inverse_branch(a, u), self.inverse_branch(a, v));
                    next.push((gu.min(gv), gu.max(gv)));
                }
            }
            tails = next;
        }
        let mut worst: f64 = 0.0;
        for &(u, v) in &tails {
            for &a in &probes {
                let (gu, gv) = (self.inverse_branch(a, u), self.inverse_branch(a, v));
                worst = worst.max((self.log_derivative(a, gu) - self.log_derivative(a, gv)).abs());
            }
        }
        worst
    }
}

impl MarkovSystem for MpInducedModel {
    fn id(&self) -> String {
        format!("mp:{}", self.beta)
    }

    fn alphabet(&self) -> Alphabet {
        match self.cutoff {
            Some(n) => Alphabet::Finite(n),
            None => Alphabet::Infinite,
        }
    }

    fn inverse_branch(&self, symbol: Symbol, x: f64) -> f64 {
        let mut y = self.right_preimage(x);
        for _ in 1..symbol {
            y = self.left_preimage(y);
        }
        y
    }

    fn log_derivative(&self, symbol: Symbol, x: f64) -> f64 {
        let mut total = 0.0;
        self.for_each_orbit_point(symbol, x, |y| total += self.map_derivative(y).ln());
        total
    }

    fn branch_interval(&self, symbol: Symbol) -> (f64, f64) {
        (self.boundary(symbol), self.boundary(symbol - 1))
    }

    /// Estimated, not certified: the largest spread of `log|T'|` over the
    /// endpoints of sampled depth-`k` cylinders built from small and
    /// geometrically spaced symbols.
    fn log_derivative_variation(&self, depth: usize) -> f64 {
        match depth {
            0 => f64::INFINITY,
            d if d <= SAMPLED_DEPTH => self.sampled_log_derivative_variation(d),
            d => {
                let (prev, last) = (self.sampled_log_derivative_variation(SAMPLED_DEPTH - 1), self.sampled_log_derivative_variation(SAMPLED_DEPTH));
                crate::potential::geometric_extension(prev, last, d - SAMPLED_DEPTH)
            }
        }
    }

    /// `F` maps `g_a(z)` to `g_(a-1)(z)`, so the return-orbit sums telescope.
    fn log_derivative_chain(&self, pts: &[f64]) -> Vec<f64> {
        let mut acc = 0.0;
        pts.iter()
            .map(|&x| {
                acc += self.map_derivative(x).ln();
                acc
            })
            .collect()
    }

    fn branch_images(&self, y: f64, count: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        if count == 0 {
            return out;
        }
        let mut z = self.right_preimage(y);
        out.push(z);
        for _ in 1..count {
            z = self.left_preimage(z);
            out.push(z);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_beta_outside_unit_interval() {
        assert!(MpInducedModel::new(0.0).is_err());
        assert!(MpInducedModel::new(1.0).is_err());
        assert!(MpInducedModel::new(-0.3).is_err());
        assert!(MpInducedModel::with_cutoff(0.5, 0).is_err());
    }

    #[test]
    fn first_branch_starts_at_t() {
        let m = MpInducedModel::new(0.5).unwrap();
        let t = m.t();
        assert!((t + t.powf(1.5) - 1.0).abs() < 1e-12);
        // independent bisection on t + t^{3/2} = 1
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-14 {
            let mid = 0.5 * (lo + hi);
            if mid + mid.powf(1.5) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((t - lo).abs() < 1e-12);
        assert_eq!(m.branch_interval(1), (t, 1.0));
    }

    #[test]
    fn inverse_branches_land_in_their_intervals() {
        let m = MpInducedModel::new(0.5).unwrap();
        for a in [1, 2, 3, 7, 40] {
            let (l, r) = m.branch_interval(a);
            for x in [0.0, 0.3, 0.9, 1.0] {
                let y = m.inverse_branch(a, x);
                assert!(y >= l - 1e-15 && y <= r + 1e-15, "a={a} x={x} y={y} in [{l},{r}]");
                // a forward steps return to x
                let mut z = y;
                for _ in 0..a {
                    z = m.lift(z);
                }
                assert!((z - 1.0 - x).abs() < 1e-9, "a={a} x={x} z={z}");
            }
        }
    }

    #[test]
    fn chained_images_match_direct_inverse() {
        let m = MpInducedModel::new(0.3).unwrap();
        let chain = m.branch_images(0.42, 25);
        for (i, &y) in chain.iter().enumerate() {
            assert!((y - m.inverse_branch(i + 1, 0.42)).abs() < 1e-15);
        }
    }

    #[test]
    fn uniformly_expanding_on_every_branch() {
        let m = MpInducedModel::new(0.5).unwrap();
        for a in 1..30 {
            let (l, r) = m.branch_interval(a);
            for x in [l, 0.5 * (l + r), r] {
                assert!(m.log_derivative(a, x) > 0.5, "a={a}");
            }
        }
    }
}
