use thiserror::Error;

/// Errors raised by the simulation and verification routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Parameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("kernel is singular at s = {location}")]
    Singular { location: f64 },

    #[error("kernel is singular at the pair (s, u) = ({s}, {u})")]
    SingularPair { s: f64, u: f64 },

    #[error("index {index} outside 1..={len}")]
    Range { index: usize, len: usize },

    #[error("empty sample: {0}")]
    EmptySample(&'static str),

    #[error("quadrature produced a non-finite value in the cell centred at (s, u) = ({s}, {u})")]
    Quadrature { s: f64, u: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::Parameter {
        name,
        value,
        reason,
    }
}
