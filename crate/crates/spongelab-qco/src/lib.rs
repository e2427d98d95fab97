//! Exact simulator for compressed function oracles at tiny dimensions.
//!
//! Functions [M] -> [N] are purified into a function register; the
//! compressed basis swaps the uniform superposition with an undefined
//! marker per input, making the register read like a lazily sampled
//! database. Everything here is dense complex linear algebra checked to
//! near machine precision: the compression/query operator identities,
//! support growth, validity, transition capacities via SVD, the
//! fundamental lemma, and the sorted padded-list representation of the
//! query operator.

pub mod capacity;
pub mod checks;
pub mod db;
pub mod efficient;
pub mod fundlemma;
pub mod matrix;
pub mod ops;
pub mod predicates;

pub use db::{AmpVector, Dims};
pub use matrix::CMat;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("dense dimension cap exceeded: {0}")]
    CapExceeded(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Default cap on the joint dimension M * (N+1)^M * N.
pub const DEFAULT_DENSE_CAP: usize = 200_000;

/// Environment variable overriding the joint-dimension cap.
pub const DENSE_CAP_ENV: &str = "SPONGELAB_DENSE_CAP";

pub fn dense_cap() -> usize {
    std::env::var(DENSE_CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_DENSE_CAP)
}
