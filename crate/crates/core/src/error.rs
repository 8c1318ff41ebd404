use thiserror::Error;

/// Errors raised by the numerical and domain layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is rank deficient (rank {rank} of {dim})")]
    RankDeficient { rank: usize, dim: usize },

    #[error("invalid correlation matrix: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidCorrelation(Vec<CorrelationViolation>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "nonzero eigenvalues {left:.6e} and {right:.6e} are nearly degenerate \
         (relative gap {gap:.2e}); use the identical-eigenvalue formula or jitter the spectrum"
    )]
    Degenerate { left: f64, right: f64, gap: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input shape.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPsd { .. } | Error::Degenerate { .. } | Error::RankDeficient { .. }
        )
    }
}

/// One violated invariant of a transmit correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrelationViolation {
    Shape { rows: usize, cols: usize, expected: usize },
    NonFinite,
    NotHermitian { asymmetry: f64 },
    NotPsd { eigenvalue: f64 },
    Trace { trace: f64, expected: f64 },
}

impl std::fmt::Display for CorrelationViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CorrelationViolation::Shape { rows, cols, expected } => {
                write!(f, "shape {rows}x{cols}, expected {expected}x{expected}")
            }
            CorrelationViolation::NonFinite => write!(f, "non-finite entries"),
            CorrelationViolation::NotHermitian { asymmetry } => {
                write!(f, "not Hermitian (asymmetry {asymmetry:.3e})")
            }
            CorrelationViolation::NotPsd { eigenvalue } => {
                write!(f, "not PSD (eigenvalue {eigenvalue:.3e})")
            }
            CorrelationViolation::Trace { trace, expected } => {
                write!(f, "trace {trace} != {expected}")
            }
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
