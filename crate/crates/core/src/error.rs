use thiserror::Error;

/// Errors raised by the thermodynamic and filtration solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state (T = {t}, v = {v}) is outside the model domain")]
    Domain { t: f64, v: f64 },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("singular point (T = {t}, v = {v}): {what}")]
    Singular { t: f64, v: f64, what: &'static str },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("no convergence after {iterations} iterations: {what}")]
    Convergence {
        what: String,
        iterations: usize,
        /// Residual norm per iteration.
        trace: Vec<f64>,
    },

    #[error("temperature {t} is at or above the critical temperature {t_crit}")]
    Supercritical { t: f64, t_crit: f64 },

    #[error("quadrature on [{a}, {b}] did not reach tolerance (estimated error {error})")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("field evaluated at a source position {0:?}")]
    SingularPoint([f64; 3]),

    #[error("boundary volumes do not lie in a single monotone branch of Q: {0}")]
    BranchAmbiguity(String),

    #[error("temperature {t} is below the binodal table minimum {t_min}")]
    Extrapolation { t: f64, t_min: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
