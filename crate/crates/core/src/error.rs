use thiserror::Error;

use crate::approx::ApproxResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("f vanishes on the grid: min |f| = {min_abs:e}, max |f| = {max_abs:e}")]
    VanishingF { min_abs: f64, max_abs: f64 },

    #[error("capacity exceeded for {what}: requested {requested}, cap {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("incompatible Goursat data: phi(0) = {phi0}, psi(0) = {psi0}")]
    Compatibility { phi0: String, psi0: String },

    #[error("Haar condition violated: {0}")]
    HaarViolation(String),

    #[error("Remez exchange requires real-valued data and basis; use minimax_lp for complex data")]
    ComplexData,

    #[error(
        "Remez stagnation at iteration {iteration}: |E| fell from {previous:e} to {current:e} \
         (best deviation so far {best_deviation:e})"
    )]
    Stagnation {
        iteration: usize,
        previous: f64,
        current: f64,
        best_deviation: f64,
        best: Box<ApproxResult>,
    },

    #[error(
        "Remez exchange hit its cap of {iterations} iterations \
         (best deviation so far {best_deviation:e})"
    )]
    IterationCap {
        iterations: usize,
        best_deviation: f64,
        best: Box<ApproxResult>,
    },

    #[error("{what} did not converge after {iterations} iterations (last change {residual:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("linear program: {0}")]
    LinearProgram(String),

    #[error("configuration error: {0}")]
    Configuration(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
