use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state support escapes the propagation box at mode {mode:?}")]
    BoxEscape { mode: Vec<i64> },

    #[error("operator output would leave the hard box bound {bound} (mode {mode:?})")]
    BoxBound { bound: i64, mode: Vec<i64> },

    #[error("symbol carries no module tag")]
    MissingModuleTag,

    #[error("symbol mode {mode:?} is not in the tagged module")]
    ModeOutsideModule { mode: Vec<i64> },

    #[error("module chain is not strictly decreasing at level {level}")]
    ChainNotDecreasing { level: usize },

    #[error("symbol takes the negative value {value:e} at a sample point")]
    NegativeSymbol { value: f64 },

    #[error("time-dependent potentials are not supported by {operation}")]
    TimeDependentPotential { operation: &'static str },

    #[error("propagator plan has no eigendecomposition")]
    NoEigenbasis,

    #[error("mode mismatch: {0}")]
    ModeMismatch(String),

    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),

    #[error("ξ-boxes {first} and {second} overlap")]
    OverlappingBoxes { first: usize, second: usize },

    #[error("observation boxes {first} and {second} overlap")]
    OverlappingObservation { first: usize, second: usize },

    #[error("the zero state has no quotient")]
    ZeroState,

    #[error("invalid rational literal {0:?}")]
    ParseRational(String),

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("numeric invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code: 2 for invalid input, 3 for numeric failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::BoxEscape { .. }
            | Error::BoxBound { .. }
            | Error::NegativeSymbol { .. }
            | Error::NoEigenbasis
            | Error::ModeMismatch(_)
            | Error::ZeroState
            | Error::Invariant(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
