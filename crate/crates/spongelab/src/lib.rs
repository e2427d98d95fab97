//! A desk-scale laboratory for the sponge construction over explicit
//! permutations.
//!
//! The crate decomposes the sponge permutation into three Feistel-style
//! layers around an inner permutation, realizes the corresponding
//! lazy-sampled oracle world, and builds the combinatorial machinery
//! (tails, intermediate pairs, good/bad databases) needed to check
//! collision, preimage and indifferentiability claims empirically at
//! small state sizes. Everything is exact or seeded-deterministic; no
//! cryptographic-strength parameters are supported by design.

pub mod analysis;
pub mod exp;
pub mod lazy;
pub mod params;
pub mod perm;
pub mod rng;
pub mod sim;
pub mod sponge;
pub mod stats;

pub use params::{Params, Word, DEFAULT_STATE_BITS_CAP};
pub use perm::{FuncTable, LayerKind, PermTable};
pub use rng::Rng64;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("state size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("invalid sponge input: {0}")]
    InvalidInput(String),
    #[error("query budget exceeded (limit {limit})")]
    BudgetExceeded { limit: usize },
    #[error("contract violation: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
