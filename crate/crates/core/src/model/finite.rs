use std::path::Path;

use super::{Alphabet, MarkovSystem, Symbol};
use crate::error::{Error, Result};

/// Parsed contents of a finite model file.
///
/// One line per symbol: `left right v_1 v_2 ...`, whitespace separated. Lines
/// starting with `#` are comments, except an optional `# potentials: name ...`
/// line naming the value columns (default names `p1`, `p2`, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteModelSpec {
    pub branches: Vec<(f64, f64)>,
    pub columns: Vec<String>,
    /// `values[symbol - 1][column]`
    pub values: Vec<Vec<f64>>,
}

impl FiniteModelSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut named: Option<Vec<String>> = None;
        let mut branches = Vec::new();
        let mut values: Vec<Vec<f64>> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(names) = comment.trim().strip_prefix("potentials:") {
                    named = Some(names.split_whitespace().map(str::to_string).collect());
                }
                continue;
            }
            let fields = line
                .split_whitespace()
                .map(|f| f.parse::<f64>().map_err(|_| Error::ModelFile(format!("line {}: `{f}` is not a number", lineno + 1))))
                .collect::<Result<Vec<f64>>>()?;
            if fields.len() < 2 {
                return Err(Error::ModelFile(format!("line {}: need at least the two branch endpoints", lineno + 1)));
            }
            branches.push((fields[0], fields[1]));
            values.push(fields[2..].to_vec());
        }
        if branches.is_empty() {
            return Err(Error::ModelFile("no branches".into()));
        }
        let width = values[0].len();
        if values.iter().any(|row| row.len() != width) {
            return Err(Error::ModelFile("rows have differing numbers of potential values".into()));
        }
        let columns = match named {
            Some(names) if names.len() == width => names,
            Some(names) => {
                return Err(Error::ModelFile(format!("{} potential names for {width} value columns", names.len())));
            }
            None => (1..=width).map(|i| format!("p{i}")).collect(),
        };
        let spec = FiniteModelSpec { branches, columns, values };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        for (i, &(l, r)) in self.branches.iter().enumerate() {
            if !(l.is_finite() && r.is_finite() && 0.0 <= l && l < r && r <= 1.0) {
                return Err(Error::ModelFile(format!("branch {} = [{l}, {r}] is not a subinterval of [0, 1]", i + 1)));
            }
            if r - l >= 1.0 && self.branches.len() > 1 {
                return Err(Error::ModelFile(format!("branch {} is not expanding", i + 1)));
            }
        }
        if self.branches.len() == 1 && self.branches[0].1 - self.branches[0].0 >= 1.0 {
            return Err(Error::ModelFile("a single branch must be a proper subinterval".into()));
        }
        // Branches must be monotonically ordered with disjoint interiors.
        let increasing = self.branches.windows(2).all(|w| w[0].1 <= w[1].0);
        let decreasing = self.branches.windows(2).all(|w| w[1].1 <= w[0].0);
        if !(increasing || decreasing) {
            return Err(Error::ModelFile("branches overlap or are not monotonically ordered".into()));
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::ModelFile("potential values must be finite".into()));
        }
        Ok(())
    }
}

/// Finitely many affine increasing full branches `g_a(x) = l_a + (r_a - l_a) x`
/// together with a table of one-step potentials.
#[derive(Debug, Clone)]
pub struct FiniteModel {
    id: String,
    spec: FiniteModelSpec,
}

impl FiniteModel {
    pub fn new(spec: FiniteModelSpec) -> Result<Self> {
        spec.validate()?;
        Ok(FiniteModel { id: "finite:<inline>".into(), spec })
    }

    pub fn from_text(id: impl Into<String>, text: &str) -> Result<Self> {
        Ok(FiniteModel { id: id.into(), spec: FiniteModelSpec::parse(text)? })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(format!("finite:{}", path.display()), &text)
    }

    /// Equal-width branches tiling `[0, 1]` with the given one-step potential columns.
    pub fn uniform(columns: Vec<(String, Vec<f64>)>, symbols: usize) -> Result<Self> {
        let width = 1.0 / symbols as f64;
        let branches = (0..symbols).map(|i| (i as f64 * width, (i + 1) as f64 * width)).collect();
        Self::with_branches(branches, columns)
    }

    pub fn with_branches(branches: Vec<(f64, f64)>, columns: Vec<(String, Vec<f64>)>) -> Result<Self> {
        let symbols = branches.len();
        if columns.iter().any(|(_, v)| v.len() != symbols) {
            return Err(Error::ModelFile("potential column length differs from the branch count".into()));
        }
        let values = (0..symbols).map(|s| columns.iter().map(|(_, v)| v[s]).collect()).collect();
        let names = columns.into_iter().map(|(n, _)| n).collect();
        Self::new(FiniteModelSpec { branches, columns: names, values })
    }

    pub fn spec(&self) -> &FiniteModelSpec {
        &self.spec
    }

    pub fn symbols(&self) -> usize {
        self.spec.branches.len()
    }

    /// Values of the named one-step potential, indexed by `symbol - 1`.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.spec.columns.iter().position(|c| c == name)?;
        Some(self.spec.values.iter().map(|row| row[idx]).collect())
    }
}

impl MarkovSystem for FiniteModel {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Finite(self.symbols())
    }

    fn inverse_branch(&self, symbol: Symbol, x: f64) -> f64 {
        let (l, r) = self.spec.branches[symbol - 1];
        l + (r - l) * x
    }

    fn log_derivative(&self, symbol: Symbol, _x: f64) -> f64 {
        let (l, r) = self.spec.branches[symbol - 1];
        -(r - l).ln()
    }

    fn branch_interval(&self, symbol: Symbol) -> (f64, f64) {
        self.spec.branches[symbol - 1]
    }

    fn log_derivative_variation(&self, depth: usize) -> f64 {
        if depth == 0 {
            f64::INFINITY
        } else {
            0.0
        }
    }

    fn cylinder_log_derivative(&self, symbol: Symbol, _u: f64, _v: f64, _gu: f64, _gv: f64) -> f64 {
        self.log_derivative(symbol, 0.0)
    }
}
