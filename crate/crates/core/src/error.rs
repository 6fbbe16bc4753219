use thiserror::Error;

/// Everything that can go wrong between building a model and emitting a spectrum.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown model identifier `{0}`")]
    UnknownModel(String),

    #[error("unknown potential `{name}` for model `{model}`")]
    UnknownPotential { name: String, model: String },

    #[error("symbol {symbol} has no branch (alphabet has {available} symbols)")]
    EmptyBranch { symbol: usize, available: usize },

    #[error("enumeration of {requested} cylinder words exceeds the budget of {budget}")]
    BudgetExceeded { requested: u128, budget: u64 },

    #[error("power iteration did not converge after {iterations} iterations (last change {last_change:e})")]
    EigenNotConverged { iterations: usize, last_change: f64 },

    #[error("finiteness test inconclusive: tail exponents {exponents:?} are not monotone")]
    Inconclusive { exponents: Vec<f64> },

    #[error("pressure is infinite for this combination")]
    InfinitePressure,

    #[error("root not bracketed on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})")]
    NotBracketed { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("alpha = {alpha} lies outside the ratio range reachable by the truncated system")]
    OutOfRange { alpha: f64 },

    #[error("entropy identity violated: direct {direct:e} vs pressure-based {from_pressure:e}")]
    EntropyMismatch { direct: f64, from_pressure: f64 },

    #[error("ratio of branch values diverges at the accumulation point")]
    RatioDiverges,

    #[error("J2 tags are not contiguous (truncation artifact) at alpha = {offending:?}")]
    PlateauNotContiguous { offending: Vec<f64> },

    #[error("precondition not asserted: {0}")]
    Precondition(String),

    #[error("malformed model file: {0}")]
    ModelFile(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Configuration and identifier problems, as opposed to numerical failures.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::UnknownModel(_)
                | Error::UnknownPotential { .. }
                | Error::ModelFile(_)
                | Error::Config(_)
                | Error::Io(_)
                | Error::Precondition(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
