//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported order {order} (maximum {max})")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("outside validity regime: {0}")]
    Regime(String),

    #[error("accuracy target not met: best estimate {best} with error estimate {error}")]
    Accuracy { best: f64, error: f64 },

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("boundary corrections diverge at n = {n}; restart the sum at n0 = {suggested_n0}")]
    SingularStart { n: u32, suggested_n0: u32 },

    #[error("derivative capability exceeded: {0}")]
    Capability(String),

    #[error("ill-conditioned fit (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("no stable plateau found (spread {spread:.3e} exceeds 10x bound {bound:.3e})")]
    NoPlateau { spread: f64, bound: f64 },

    #[error("gauge-trivial mode excluded: {0}")]
    ExcludedMode(String),

    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
