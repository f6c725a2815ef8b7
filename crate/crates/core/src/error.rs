use thiserror::Error;

/// Errors raised while constructing or transporting states, observables and processes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("effect {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    EffectNotPositive { index: usize, min_eigenvalue: f64 },

    #[error("effects do not sum to identity (deviation {deviation:.3e})")]
    IncompletePovm { deviation: f64 },

    #[error("process is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("classical channel column {column} is not a probability vector")]
    NotStochastic { column: usize },

    #[error("map not positive on this input (min output eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveOnInput { min_eigenvalue: f64 },

    #[error("functional not representable (residual {residual:.3e})")]
    NotRepresentable { residual: f64 },

    #[error("negative radicand {value:.3e} in contraction loss")]
    NegativeRadicand { value: f64 },

    #[error("joint marginal {which} deviates from its measurement by {deviation:.3e}")]
    MarginalMismatch { which: usize, deviation: f64 },

    #[error("measurement has no outcome labels")]
    MissingLabels,

    #[error("equivalent characterizations disagree: {0}")]
    PredicateDisagreement(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// True for failures that indicate numerical breakdown rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotRepresentable { .. }
                | Error::NegativeRadicand { .. }
                | Error::PredicateDisagreement(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
