use thiserror::Error;

/// Every failure the library can report.
///
/// Variants carry the measured quantity that violated a bound so callers can
/// print a useful message without recomputing it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e}, allowed {allowed:.3e})")]
    NotHermitian { asymmetry: f64, allowed: f64 },

    #[error("eigen/singular value iteration did not converge")]
    NoConvergence,

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e}, allowed {allowed:.3e})")]
    NotPsd { min_eig: f64, allowed: f64 },

    #[error("operator is not a contraction (norm {norm:.12}, allowed {allowed:.12})")]
    NotContraction { norm: f64, allowed: f64 },

    #[error("no contractive factor exists (solved norm {norm:.12}, allowed {allowed:.12})")]
    NoFactor { norm: f64, allowed: f64 },

    #[error("X*X and Y*Y differ by {deviation:.3e} (allowed {allowed:.3e})")]
    NotEquinormed { deviation: f64, allowed: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("unsupported shape: {0}")]
    ShapeUnsupported(String),

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("map is not unital (deviation {deviation:.3e})")]
    NotUnital { deviation: f64 },

    #[error("effects do not resolve the identity (deviation {deviation:.3e})")]
    NotResolution { deviation: f64 },

    #[error("effect {index} is not rank one")]
    EffectsNotRankOne { index: usize },

    #[error("Kraus operators are not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("padding to ancilla dimension {requested} is below the minimum {minimum}")]
    PaddingTooSmall { requested: usize, minimum: usize },

    #[error("not a density matrix: {0}")]
    NotState(String),
}

impl Error {
    /// True for violations of a mathematical precondition on the input data,
    /// as opposed to malformed input or numerical breakdown.
    pub fn is_domain(&self) -> bool {
        !matches!(
            self,
            Error::InvalidMatrix(_) | Error::NoConvergence | Error::UnknownName(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
