use thiserror::Error;

use crate::quadgrid::Representation;

/// Errors raised by the laboratory. Each variant names the violated
/// precondition so that the CLI can surface it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("states live on different grids")]
    GridMismatch,

    #[error("expected {expected:?} representation, found {found:?}")]
    Representation {
        expected: Representation,
        found: Representation,
    },

    #[error("not resolvable on this grid: {0}")]
    Unresolvable(String),

    #[error("inadmissible comb truncation: {0}")]
    InadmissibleTruncation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shift {shift} exceeds the allowed range |shift| < {limit}")]
    ShiftOutOfRange { shift: f64, limit: f64 },

    #[error("detector: {0}")]
    Detector(String),

    #[error("bin {k} carries no probability mass ({probability:e})")]
    EmptyBin { k: i64, probability: f64 },

    #[error("empty ensemble or distribution")]
    Empty,

    #[error("conditioning event has zero probability")]
    ZeroProbability,
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::EmptyBin { .. } | Error::ZeroProbability | Error::Empty)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
