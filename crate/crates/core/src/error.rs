use thiserror::Error;

use crate::group::ValidationReport;

/// Every failure the library can report. Each variant maps onto a stable
/// machine-readable code via [`Error::code`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("iterative solver did not converge: {0}")]
    NonConvergence(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is numerically singular")]
    SingularMatrix,

    #[error("lattice map has zero determinant")]
    SingularLatticeMap,

    #[error("matrix is not elliptic: {0}")]
    NotElliptic(String),

    #[error("endomorphism is not surjective: {0}")]
    NotSurjective(String),

    #[error("group variant `{group}` does not match endomorphism variant `{endo}`")]
    VariantMismatch { group: String, endo: String },

    #[error("operation not defined for variant `{0}`")]
    UnsupportedVariant(String),

    #[error("descriptor failed validation with {} error(s)", .0.error_count())]
    ValidationFailed(ValidationReport),

    #[error("budget exhausted: {0}")]
    BudgetExceeded(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow in exact arithmetic: {0}")]
    Overflow(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonConvergence(_) => "NON_CONVERGENCE",
            Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::SingularMatrix => "SINGULAR_MATRIX",
            Error::SingularLatticeMap => "SINGULAR_LATTICE_MAP",
            Error::NotElliptic(_) => "NOT_ELLIPTIC",
            Error::NotSurjective(_) => "NOT_SURJECTIVE",
            Error::VariantMismatch { .. } => "VARIANT_MISMATCH",
            Error::UnsupportedVariant(_) => "UNSUPPORTED_VARIANT",
            Error::ValidationFailed(_) => "VALIDATION_FAILED",
            Error::BudgetExceeded(_) => "BUDGET_EXCEEDED",
            Error::InvalidMatrix(_) => "INVALID_MATRIX",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::Overflow(_) => "OVERFLOW",
            Error::Parse { .. } => "PARSE_ERROR",
        }
    }

    /// Input and validation problems, as opposed to numeric failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::VariantMismatch { .. }
                | Error::UnsupportedVariant(_)
                | Error::ValidationFailed(_)
                | Error::InvalidMatrix(_)
                | Error::InvalidArgument(_)
                | Error::NotSurjective(_)
                | Error::SingularLatticeMap
                | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
