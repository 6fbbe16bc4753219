use super::{Alphabet, MarkovSystem, Symbol};

/// The Gauss map `x -> 1/x - [1/x]`, coded by continued-fraction digits.
#[derive(Debug, Clone, Default)]
pub struct GaussModel;

impl GaussModel {
    pub fn new() -> Self {
        GaussModel
    }
}

/// Fibonacci numbers with `F_0 = 0`, `F_1 = 1`, saturating in f64.
fn fibonacci(n: usize) -> f64 {
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    for _ in 0..n {
        let next = a + b;
        a = b;
        b = next;
    }
    a
}

impl MarkovSystem for GaussModel {
    fn id(&self) -> String {
        "gauss".to_string()
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Infinite
    }

    fn inverse_branch(&self, symbol: Symbol, x: f64) -> f64 {
        1.0 / (symbol as f64 + x)
    }

    fn log_derivative(&self, _symbol: Symbol, x: f64) -> f64 {
        -2.0 * x.ln()
    }

    fn branch_interval(&self, symbol: Symbol) -> (f64, f64) {
        let a = symbol as f64;
        (1.0 / (a + 1.0), 1.0 / a)
    }

    /// The longest depth-`m` cylinder is `[1, 1, ..., 1]`, of length
    /// `1 / (F_{m+1} F_{m+2})`; the derivative `x^-2` varies on
    /// `1/(a + [u, v])` by at most `2 log(1 + (v - u))`.
    fn log_derivative_variation(&self, depth: usize) -> f64 {
        if depth == 0 {
            return f64::INFINITY;
        }
        let longest_tail = 1.0 / (fibonacci(depth) * fibonacci(depth + 1));
        2.0 * longest_tail.ln_1p()
    }

    fn cylinder_log_derivative(&self, symbol: Symbol, u: f64, v: f64, _gu: f64, _gv: f64) -> f64 {
        // |g_a([u, v])| = |v - u| / ((a + u)(a + v)) exactly.
        let a = symbol as f64;
        (a + u).ln() + (a + v).ln()
    }
}
