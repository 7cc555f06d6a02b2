use thiserror::Error;

/// Errors raised by the density, state and oracle computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The grid does not span the region where the result has support.
    #[error("grid [{grid_min}, {grid_max}] does not cover the required range [{required_min}, {required_max}]")]
    Coverage {
        grid_min: f64,
        grid_max: f64,
        required_min: f64,
        required_max: f64,
    },

    #[error("impossible herald at T = {time}: the herald-time density vanishes there")]
    ImpossibleHerald { time: f64 },

    #[error("insufficient statistics: {accepted} of {trials} trials passed the conditioning")]
    InsufficientStatistics { accepted: u64, trials: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
