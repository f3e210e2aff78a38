use thiserror::Error;

use crate::quat::Quaternion;

pub type Result<T, E = FockError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("no trigonometric form for the zero quaternion")]
    NoTrigForm,

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "truncation error exceeds tolerance: tail bound {tail:e} at radius {radius} with degree cap {cap}"
    )]
    Truncation { radius: f64, cap: usize, tail: f64 },

    #[error("integrand overflow at node {node} (value {value})")]
    IntegrandOverflow { node: Quaternion, value: f64 },

    #[error("not in space: {0}")]
    NotInSpace(String),

    #[error("undefined ratio: the denominator norm is zero")]
    UndefinedRatio,

    #[error("ill-conditioned matrix: leading minor {minor} (condition estimate {condition:e})")]
    IllConditioned { minor: usize, condition: f64 },

    #[error("solver did not converge after {iterations} iterations (best objective {objective:e})")]
    SolverFailure {
        iterations: usize,
        objective: f64,
        best: Vec<Quaternion>,
    },

    #[error("radius grid too large: no radius could be evaluated")]
    RadiusGridTooLarge,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
