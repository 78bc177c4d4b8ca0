use thiserror::Error;

/// Errors raised by the numerical core.
///
/// The CLI maps these onto exit codes: parse errors to 2, precondition and
/// geometry errors to 3, numeric failures (singular nodes, eigenvalue
/// breakdown) to 4.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular matrix: pivot {pivot} has modulus {modulus:e} below threshold {threshold:e}")]
    Singular {
        pivot: usize,
        modulus: f64,
        threshold: f64,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("series outside its convergence domain: |T| = {norm:e}, |s| = {modulus:e}")]
    Divergence { norm: f64, modulus: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag used in error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DimensionMismatch { .. } => "dimension",
            Error::Singular { .. } => "singular",
            Error::Invariant(_) => "invariant",
            Error::Precondition(_) => "precondition",
            Error::Geometry(_) => "geometry",
            Error::Divergence { .. } => "divergence",
            Error::Numeric(_) => "numeric",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
