use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid simple type {family}{rank}: {reason}")]
    InvalidType {
        family: char,
        rank: usize,
        reason: &'static str,
    },

    #[error("cannot parse simple type from {0:?}")]
    ParseType(String),

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("zero vector has no Weyl orbit span")]
    ZeroVector,

    #[error("vector is not in the span of the simple roots")]
    NotInRootSpan,

    #[error("diagram component matches no simple type: {0}")]
    Unclassifiable(String),

    #[error("Euler characteristic undefined: {0}")]
    NotEqualRank(String),

    #[error("no concrete model for {0} (catalog-only case)")]
    NoConcreteModel(String),

    #[error("element is not in the algebra (projection residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },

    #[error("degenerate Killing form on requested complement")]
    DegenerateForm,

    #[error("model validation failed: {0}")]
    Validation(String),

    #[error("no logarithm found after {restarts} restarts (best residual {best_residual:.3e})")]
    NoLogFound { restarts: usize, best_residual: f64 },

    #[error("matrix has determinant {0:+.6}, expected -1")]
    WrongDeterminant(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("golden file: {0}")]
    Golden(String),
}

pub type Result<T> = std::result::Result<T, Error>;
