use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FasError {
    /// An argument violated an operation's domain (index out of range,
    /// mismatched dimensions, non-symmetric input, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that must be invertible was singular to working tolerance.
    #[error("numerical rank deficiency: {0}")]
    NumericalRank(String),

    /// Exhaustive search was asked to enumerate more combinations than allowed.
    #[error("exhaustive search refused: {count} port combinations exceed the limit of {limit}")]
    TooManyCombinations { count: u128, limit: u128 },

    /// Not enough ports satisfy the minimum-separation constraint.
    #[error("greedy selection infeasible: only {available} of {requested} ports satisfy separation {separation} on the {side} side")]
    Infeasible {
        side: &'static str,
        requested: usize,
        available: usize,
        separation: f64,
    },

    /// Bisection could not bracket the water level.
    #[error("water level search interval too small: mu_max = {mu_max} cannot reach snr = {snr}")]
    Interval { mu_max: f64, snr: f64 },

    /// Invalid campaign configuration.
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl FasError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FasError::Domain(msg.into())
    }
}

impl From<std::io::Error> for FasError {
    fn from(e: std::io::Error) -> Self {
        FasError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, FasError>;
