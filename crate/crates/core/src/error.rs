use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {abs_err:e})")]
    NonConvergence { subdivisions: usize, abs_err: f64 },

    #[error("infeasible order parameters: Gram determinant {det:e} (R_B={r_b}, R_J={r_j}, R_BJ={r_bj})")]
    InfeasibleState { det: f64, r_b: f64, r_j: f64, r_bj: f64 },

    #[error("degenerate covariance (conditional variance {0:e})")]
    DegenerateCovariance(f64),

    #[error("trajectory aborted at t = {t}: {reason}")]
    Aborted { t: f64, reason: String },
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_))
    }
}
