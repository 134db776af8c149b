use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("matrix is not Hermitian: max |M_ij - conj(M_ji)| = {max_deviation:e} exceeds {tolerance:e}")]
    NotHermitian { max_deviation: f64, tolerance: f64 },

    #[error("operator is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("eigensolver did not converge after {iterations} iterations (unresolved off-diagonal {offdiag:e} at index {index})")]
    NoConvergence {
        iterations: usize,
        index: usize,
        offdiag: f64,
    },

    #[error("threshold {epsilon:e} never reached; final residual ratio {final_ratio:e}")]
    NotConverged { epsilon: f64, final_ratio: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("quadrature failed on [{lo}, {hi}] after {evaluations} panel evaluations (estimated error {error:e})")]
    Quadrature {
        lo: f64,
        hi: f64,
        evaluations: usize,
        error: f64,
    },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
