//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u8, right: u8 },

    #[error("{0} is not a prime modulus")]
    NotPrime(u8),

    #[error("value {value} is outside GF({modulus})")]
    ValueOutOfField { value: u8, modulus: u8 },

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("probabilities sum to {0}, expected 1")]
    InvalidMass(f64),

    #[error("duplicate outcome in distribution support")]
    DuplicateOutcome,

    #[error("{name} = {value} is out of range: {reason}")]
    OutOfRange {
        name: &'static str,
        value: usize,
        reason: &'static str,
    },

    #[error("{name} = {value} must lie in [{lo}, {hi}]")]
    ParameterRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dimension mismatch for {name}: expected {expected}, found {found}")]
    DimensionMismatch {
        name: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("partition count {eta} does not divide the file count {m_count}")]
    PartitionMismatch { eta: usize, m_count: usize },

    #[error(
        "enumeration needs {states} states, above the budget of {budget}; \
         use a closed form or the Monte Carlo simulator instead"
    )]
    StateBudgetExceeded { states: u128, budget: u64 },

    #[error("inconsistent decode inputs: {0}")]
    InconsistentDecode(&'static str),
}
