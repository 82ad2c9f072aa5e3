use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("iteration did not converge: {0}")]
    Convergence(String),

    #[error("integral not resolved to {tol:e} after {refinements} refinements (estimate {estimate:e})")]
    NonIntegrable {
        tol: f64,
        refinements: usize,
        estimate: f64,
    },

    #[error("step size underflow at u = {u} (h = {h:e})")]
    StepFailure { u: f64, h: f64 },

    #[error("horizon window too short: remainder bound {bound:e} exceeds {limit:e}")]
    WindowTooShort { bound: f64, limit: f64 },

    #[error("frequency {omega} sits on the regime boundary |omega| = m = {m}")]
    RegimeBoundary { omega: f64, m: f64 },

    #[error("constraint violated: {0}")]
    ConstraintViolation(String),

    #[error("quadrature budget exceeded: {0}")]
    QuadratureBudgetExceeded(String),

    #[error("missing radial solution: {0}")]
    MissingSolution(String),

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not a projection (deviation {deviation:e})")]
    NotProjection { deviation: f64 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;
