//! Countable-branch expanding Markov interval maps.
//!
//! A model is described entirely through its inverse branches: symbol `a`
//! (1-based) owns the closed interval `I_a = g_a([0, 1])`, and `T` restricted
//! to `I_a` is the inverse of `g_a`. Every shipped model is full-branch, so the
//! symbolic coding is the full shift on the alphabet.

mod finite;
mod gauss;
mod manneville;
mod registry;

use std::fmt;
use std::sync::Arc;

pub use finite::{FiniteModel, FiniteModelSpec};
pub use gauss::GaussModel;
pub use manneville::MpInducedModel;
pub use registry::{model_from_id, LoadedModel};

use crate::error::{Error, Result};

/// Symbols are 1-based: symbol `a` names branch `I_a`.
pub type Symbol = usize;

/// Size of the branch alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alphabet {
    Finite(usize),
    Infinite,
}

impl Alphabet {
    pub fn is_finite(&self) -> bool {
        matches!(self, Alphabet::Finite(_))
    }

    /// Largest usable symbol, if any.
    pub fn limit(&self) -> Option<usize> {
        match *self {
            Alphabet::Finite(n) => Some(n),
            Alphabet::Infinite => None,
        }
    }

    /// Clamp a truncation cutoff to the alphabet.
    pub fn clamp(&self, cutoff: usize) -> usize {
        match *self {
            Alphabet::Finite(n) => cutoff.min(n),
            Alphabet::Infinite => cutoff,
        }
    }
}

/// An expanding Markov map with full branches.
///
/// Implementations are immutable after construction (lazy caches aside) and
/// may be shared between worker threads.
pub trait MarkovSystem: Send + Sync + fmt::Debug {
    /// Identifier in the `gauss` / `mp:<beta>` / `finite:<file>` scheme.
    fn id(&self) -> String;

    fn alphabet(&self) -> Alphabet;

    /// `g_a(x)`: the point of `I_a` that `T` maps to `x`. The symbol must be valid.
    fn inverse_branch(&self, symbol: Symbol, x: f64) -> f64;

    /// `log|T'(x)|` for `x` in `I_symbol`.
    fn log_derivative(&self, symbol: Symbol, x: f64) -> f64;

    /// Endpoints `(left, right)` of `I_symbol`.
    fn branch_interval(&self, symbol: Symbol) -> (f64, f64);

    /// Upper bound for the variation of `log|T'|` over depth-`k` cylinders.
    fn log_derivative_variation(&self, depth: usize) -> f64;

    /// `[g_1(y), g_2(y), ..., g_count(y)]`.
    ///
    /// Models whose branches are compositions of each other override this to
    /// share work between consecutive symbols.
    fn branch_images(&self, y: f64, count: usize) -> Vec<f64> {
        (1..=count).map(|a| self.inverse_branch(a, y)).collect()
    }

    /// `[log|T'(pts[0])|, log|T'(pts[1])|, ...]` where `pts[i]` lies in branch `i + 1`,
    /// typically the output of `branch_images`.
    fn log_derivative_chain(&self, pts: &[f64]) -> Vec<f64> {
        pts.iter().enumerate().map(|(i, &x)| self.log_derivative(i + 1, x)).collect()
    }

    /// `log|T'|` at the mean-value point of the cylinder `g_a([u, v])`, where
    /// `gu = g_a(u)` and `gv = g_a(v)`.
    ///
    /// Equals `log(|v - u| / |gv - gu|)`. When the interval is too narrow for the
    /// difference quotient to be accurate the trapezoid average of the pointwise
    /// log-derivative at both image endpoints is used instead.
    fn cylinder_log_derivative(&self, symbol: Symbol, u: f64, v: f64, gu: f64, gv: f64) -> f64 {
        let width = (v - u).abs();
        let scale = u.abs().max(v.abs()).max(f64::MIN_POSITIVE);
        if width > 1e-7 * scale && (gv - gu).abs() > 0.0 {
            (width / (gv - gu).abs()).ln()
        } else {
            0.5 * (self.log_derivative(symbol, gu) + self.log_derivative(symbol, gv))
        }
    }

    fn check_symbol(&self, symbol: Symbol) -> Result<()> {
        match self.alphabet() {
            _ if symbol == 0 => Err(Error::EmptyBranch { symbol, available: self.alphabet().limit().unwrap_or(usize::MAX) }),
            Alphabet::Finite(n) if symbol > n => Err(Error::EmptyBranch { symbol, available: n }),
            _ => Ok(()),
        }
    }
}

pub type SharedModel = Arc<dyn MarkovSystem>;

/// Shared Newton solve for the increasing convex equations the shipped maps
/// need, started to the right of the root so iterates decrease monotonically.
pub(crate) fn newton_decreasing(mut x: f64, h: impl Fn(f64) -> (f64, f64)) -> f64 {
    for _ in 0..200 {
        let (value, slope) = h(x);
        let step = value / slope;
        let next = x - step;
        if !(next < x) || step.abs() <= 2.0 * f64::EPSILON * x.abs() {
            return next.min(x).max(0.0);
        }
        x = next;
    }
    x
}
