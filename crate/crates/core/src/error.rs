use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:e} exceeds {tol:e}")]
    Symmetry { deviation: f64, tol: f64 },
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    Convergence { sweeps: usize, off_norm: f64 },
    #[error("state is not normalized: norm^2 = {norm_sqr}")]
    Normalization { norm_sqr: f64 },
    #[error("invalid density operator: {0}")]
    InvalidState(String),
    #[error("operator is not positive semidefinite: eigenvalue {eigenvalue:e}")]
    Positivity { eigenvalue: f64 },
    #[error("measurement set is not complete: max |sum M^dagger M - I| = {deviation:e}")]
    Completeness { deviation: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
