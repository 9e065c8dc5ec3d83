//! Stage-bounded busy-beaver functions and the constructions relating them.

mod cache;
mod cover;
mod encode;
mod modulus;
mod stage;

use thiserror::Error;

use crate::tinyvm::InvalidProgram;
use crate::weight::IndexOverflow;

pub use cache::{parse_stage_table, render_stage_table, StageCache, CACHE_FORMAT};
pub use cover::{bpprime_cover_enumerate, CoverEnumerator};
pub use encode::{encode_plain_as_prefix, encoded_len};
pub use modulus::{modulus_of_convergence, CertifiedSeries, HalvingSeries, DEFAULT_MODULUS_WORK};
pub use stage::{
    bpprime_of, compute_stage, compute_stage_ladder, compute_stage_with, stage_query, Query,
    Stage, StageOptions, StageTable, DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BeaverError {
    #[error("stage L={max_len} needs {needed} program runs, above the enumeration cap {cap}")]
    ResourceLimit { max_len: usize, needed: u128, cap: u64 },
    #[error("usage: {0}")]
    Usage(String),
    #[error("rule violation: {0}")]
    RuleViolation(String),
    #[error("tail bounds did not certify the modulus within {0} work units")]
    NoConvergence(u64),
    #[error("program of length {len} does not fit in {room} bits")]
    PadError { len: usize, room: u64 },
    #[error("invalid plain program: {0}")]
    InvalidProgram(#[from] InvalidProgram),
    #[error(transparent)]
    IndexOverflow(#[from] IndexOverflow),
    #[error("malformed stage cache: {0}")]
    Cache(String),
    #[error("cache i/o: {0}")]
    Io(String),
}
