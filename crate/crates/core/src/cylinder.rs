//! Cylinder words, their intervals, and Birkhoff sums along them.

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::model::{MarkovSystem, Symbol};
use crate::potential::Potential;

/// Default cap on the number of words a single enumeration may produce.
pub const DEFAULT_WORD_BUDGET: u64 = 10_000_000;

/// A finite word `(a_1, ..., a_k)` naming the cylinder `g_(a_1) ∘ ... ∘ g_(a_k)([0, 1])`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CylinderWord(pub Vec<Symbol>);

impl CylinderWord {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        CylinderWord(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }
}

impl Deref for CylinderWord {
    type Target = [Symbol];
    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<&[Symbol]> for CylinderWord {
    fn from(s: &[Symbol]) -> Self {
        CylinderWord(s.to_vec())
    }
}

/// Alphabet cutoff `n` and cylinder depth `k` of a finite sub-system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationSpec {
    pub cutoff: usize,
    pub depth: usize,
    pub budget: u64,
}

impl TruncationSpec {
    pub fn new(cutoff: usize, depth: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::InvalidParameter("alphabet cutoff n must be at least 1".into()));
        }
        if depth == 0 {
            return Err(Error::InvalidParameter("cylinder depth k must be at least 1".into()));
        }
        Ok(TruncationSpec { cutoff, depth, budget: DEFAULT_WORD_BUDGET })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    /// `n^k`, saturating.
    pub fn word_count(&self) -> u128 {
        (self.cutoff as u128).checked_pow(self.depth as u32).unwrap_or(u128::MAX)
    }

    pub fn check_budget(&self) -> Result<usize> {
        let count = self.word_count();
        if count > self.budget as u128 {
            return Err(Error::BudgetExceeded { requested: count, budget: self.budget });
        }
        Ok(count as usize)
    }
}

/// Lexicographic stream of all depth-`k` words over `{1..n}`.
#[derive(Debug, Clone)]
pub struct WordStream {
    cutoff: usize,
    current: Option<Vec<Symbol>>,
    remaining: usize,
}

impl Iterator for WordStream {
    type Item = CylinderWord;

    fn next(&mut self) -> Option<CylinderWord> {
        let word = self.current.take()?;
        self.remaining -= 1;
        if self.remaining > 0 {
            let mut next = word.clone();
            for slot in next.iter_mut().rev() {
                if *slot < self.cutoff {
                    *slot += 1;
                    break;
                }
                *slot = 1;
            }
            self.current = Some(next);
        }
        Some(CylinderWord(word))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for WordStream {}

/// All `n^k` words in lexicographic order, or `BudgetExceeded`.
pub fn enumerate_words(spec: &TruncationSpec) -> Result<WordStream> {
    let count = spec.check_budget()?;
    Ok(WordStream { cutoff: spec.cutoff, current: Some(vec![1; spec.depth]), remaining: count })
}

/// The words beginning with `lead`, for splitting an enumeration across workers.
pub fn enumerate_with_prefix(spec: &TruncationSpec, lead: Symbol) -> Result<impl Iterator<Item = CylinderWord>> {
    if lead == 0 || lead > spec.cutoff {
        return Err(Error::EmptyBranch { symbol: lead, available: spec.cutoff });
    }
    spec.check_budget()?;
    let tail = TruncationSpec { cutoff: spec.cutoff, depth: spec.depth - 1, budget: spec.budget };
    let count = if spec.depth == 1 { 1 } else { tail.word_count() as usize };
    let stream = WordStream { cutoff: spec.cutoff, current: Some(vec![1; spec.depth - 1]), remaining: count };
    Ok(stream.map(move |w| {
        let mut s = Vec::with_capacity(w.len() + 1);
        s.push(lead);
        s.extend_from_slice(&w);
        CylinderWord(s)
    }))
}

fn validate(model: &dyn MarkovSystem, word: &[Symbol]) -> Result<()> {
    if word.is_empty() {
        return Err(Error::InvalidParameter("cylinder words have length at least 1".into()));
    }
    word.iter().try_for_each(|&a| model.check_symbol(a))
}

/// `g_(a_1) ∘ ... ∘ g_(a_k)(x)`.
pub fn compose(model: &dyn MarkovSystem, word: &[Symbol], x: f64) -> f64 {
    word.iter().rev().fold(x, |y, &a| model.inverse_branch(a, y))
}

/// Canonical point of the cylinder: the image of `1` under the composed inverse branches.
pub fn representative(model: &dyn MarkovSystem, word: &[Symbol]) -> f64 {
    compose(model, word, 1.0)
}

/// Endpoints `(left, right)` of the closed cylinder interval.
pub fn cylinder_interval(model: &dyn MarkovSystem, word: &[Symbol]) -> Result<(f64, f64)> {
    validate(model, word)?;
    let (u, v) = (compose(model, word, 0.0), compose(model, word, 1.0));
    Ok((u.min(v), u.max(v)))
}

/// Cylinder length together with its derivative-based estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderLength {
    /// `|I(w)|` from the composed branch endpoints.
    pub length: f64,
    /// `exp(-S_k log|T'|)` at the representative point.
    pub derivative_length: f64,
    /// `K` with `length / derivative_length` in `[1/K, K]`.
    pub distortion_bound: f64,
}

pub fn cylinder_length(model: &dyn MarkovSystem, word: &[Symbol]) -> Result<CylinderLength> {
    let (l, r) = cylinder_interval(model, word)?;
    let sum = derivative_birkhoff_sum(model, word);
    // The mean-value point and the representative of each shifted word share
    // a depth-(k - i) cylinder.
    let spread: f64 = (1..=word.len()).map(|j| model.log_derivative_variation(j)).sum();
    Ok(CylinderLength { length: r - l, derivative_length: (-sum).exp(), distortion_bound: spread.exp() })
}

/// Representatives of every suffix: `out[i]` is the representative of `word[i..]`,
/// which is `T^i` of the representative of `word`.
fn suffix_representatives(model: &dyn MarkovSystem, word: &[Symbol]) -> Vec<f64> {
    let mut out = vec![0.0; word.len()];
    let mut x = 1.0;
    for i in (0..word.len()).rev() {
        x = model.inverse_branch(word[i], x);
        out[i] = x;
    }
    out
}

fn derivative_birkhoff_sum(model: &dyn MarkovSystem, word: &[Symbol]) -> f64 {
    suffix_representatives(model, word).iter().zip(word).map(|(&x, &a)| model.log_derivative(a, x)).sum()
}

/// `S_k φ` at the representative of `word`.
pub fn birkhoff_sum(model: &dyn MarkovSystem, potential: &Potential, word: &[Symbol]) -> Result<f64> {
    validate(model, word)?;
    let reps = suffix_representatives(model, word);
    Ok((0..word.len()).map(|i| potential.evaluate(&word[i..], reps[i])).sum())
}

/// The periodic point with coding `word word word ...`, i.e. the fixed point of `g_word`.
pub fn periodic_point(model: &dyn MarkovSystem, word: &[Symbol]) -> Result<f64> {
    validate(model, word)?;
    let mut x = 0.5;
    for _ in 0..10_000 {
        let next = compose(model, word, x);
        if (next - x).abs() <= 4.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// `S_m φ` at the periodic point of `word` (so every shift is evaluated on the true orbit).
pub fn periodic_birkhoff_sum(model: &dyn MarkovSystem, potential: &Potential, word: &[Symbol]) -> Result<f64> {
    let m = word.len();
    let mut x = periodic_point(model, word)?;
    let mut rotated: Vec<Symbol> = word.to_vec();
    let mut total = 0.0;
    for _ in 0..m {
        total += potential.evaluate(&rotated, x);
        rotated.rotate_left(1);
        // the orbit point of the rotated word, recomputed rather than iterated forward
        x = periodic_point(model, &rotated)?;
    }
    Ok(total)
}
