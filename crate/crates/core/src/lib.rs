//! Resource-bounded busy-beaver workbench.
//!
//! Everything is exact: weights are [`Dyadic`] rationals, programs run on
//! the `tinyvm-v1` machine under explicit step budgets, and the gap games
//! are adjudicated on finite transcripts.

pub mod beaver;
pub mod checks;
pub mod bits;
pub mod dyadic;
pub mod games;
pub mod seqkit;
pub mod tinyvm;
pub mod weight;

pub use bits::BitString;
pub use dyadic::Dyadic;
pub use weight::{weight_tail, Index, IndexOverflow, WeightMap};
