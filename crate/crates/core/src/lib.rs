//! Exact laboratory for weakly-private information retrieval (WPIR) over
//! replicated servers.
//!
//! A WPIR scheme trades a bounded amount of information about the requested
//! file index for better download rate, upload cost, or access complexity.
//! This crate implements two such schemes plus partition-based wrappers,
//! evaluates their (rate, upload, access, leakage) tuples exactly by
//! enumerating the query distributions, and cross-checks every closed form
//! against that enumeration.

pub mod error;
pub mod field;
pub mod metrics;
pub mod oracle;
pub mod partition;
pub mod prob;
pub mod scheme;
pub mod scheme1;
pub mod scheme2;

pub use error::Error;
pub use field::FieldElement;
pub use metrics::{evaluate, time_share, PerformanceTuple, QueryStatistics, TimeShared};
pub use partition::{BasicPartition, PartitionScheme1};
pub use prob::{binary_entropy, mutual_information, pir_capacity, JointPmf, Pmf};
pub use scheme::{
    check_perfect_privacy, verify_retrievability, Answer, Database, Query, Scheme, SchemeParams,
    Strategy, StrategyDistribution, SymbolStore,
};
pub use scheme1::Scheme1;
pub use scheme2::Scheme2;

pub type Result<T> = std::result::Result<T, Error>;
