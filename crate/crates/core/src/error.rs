use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter mismatch: {0}")]
    ParameterMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("negative time {0} (the linear semigroup only runs forward)")]
    NegativeTime(f64),

    #[error("frequency index {index} cannot be resolved on a grid of {points} points")]
    UnresolvableFrequency { index: usize, points: usize },

    #[error("Gaussian integral diverges: Re(a) = {0} is not positive")]
    DivergentIntegral(f64),

    #[error("quadrature did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e}")]
    QuadratureNonConvergence { estimate: f64, tolerance: f64 },

    #[error("closed-form flow invalid: radicand path crosses the branch cut at t = {time}")]
    BranchCrossing { time: f64 },

    #[error("solution blew up; last stable time {last_stable_time}")]
    Blowup { last_stable_time: f64 },

    #[error("Picard iteration {iteration} is not contracting (norm ratio {ratio:.3})")]
    NonContraction { iteration: usize, ratio: f64 },
}
