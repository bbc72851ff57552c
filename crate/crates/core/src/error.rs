//! Error type shared by every module of the crate.

use thiserror::Error;

/// Everything that can go wrong while validating a scenario or evaluating it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A uniform square planar array needs a perfect-square element count.
    #[error("{which} = {value} is not a perfect square; planar arrays need a square element count")]
    NonSquareArray { which: &'static str, value: usize },

    /// Orthogonal pilots need at least one symbol per user.
    #[error("pilot length tau = {tau} is shorter than the number of users K = {k}")]
    PilotTooShort { tau: usize, k: usize },

    /// A power or noise level converted to a non-positive (or non-finite) wattage.
    #[error("{field} does not convert to a strictly positive power")]
    NonPositivePower { field: &'static str },

    /// The power budget does not cover the RIS circuits.
    #[error("power budget {budget_w:.3e} W does not exceed the circuit power {circuit_w:.3e} W")]
    InfeasiblePower { budget_w: f64, circuit_w: f64 },

    /// A scaling-law evaluator was asked for a regime the Rician factors do not satisfy.
    #[error("scaling regime {regime} requires {requirement}")]
    RegimeMismatch { regime: &'static str, requirement: &'static str },

    /// A configuration key that is not part of the scenario description.
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    /// A configuration value that could not be parsed or is out of range.
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(key: &str, reason: impl Into<String>) -> Error {
    Error::InvalidValue { key: key.to_string(), reason: reason.into() }
}
