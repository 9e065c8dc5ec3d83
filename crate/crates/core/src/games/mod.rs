//! Referees, Alice's strategies and Bob adversaries for the two gap games.
//!
//! Both games are adjudicated on finite transcripts: Alice is declared the
//! winner once her condition holds after Bob's move and Bob either passes
//! or no longer has the budget to break it.

mod bots;
mod game1;
mod game2;
mod lemma;
mod transcript;

use thiserror::Error;

use crate::dyadic::Dyadic;
use crate::seqkit::SeqError;
use crate::weight::{Index, IndexOverflow, WeightMap};

pub use bots::{default_blind_schedule, BobBot, BobKind, BLIND_BUDGET, BLIND_MAX_LEN};
pub use game1::{
    alice1_strategy, game1_accounting, game1_replay, game1_run, win1_check, Alice1Plan,
    Game1Config, Game1Run, Game1State, LevelSpend,
};
pub use game2::{
    alice2_strategy, combined_alice2, finite_part, game2_replay, game2_run, win2_check, Alice2Plan, Game2Config,
    Game2Run, Game2State, Game2Sub, SubParams,
};
pub use lemma::{lemma_weight, LemmaTracker};
pub use transcript::{Header, MoveLine, Outcome, Player, Total, Transcript, Witness};

pub const DEFAULT_MAX_ROUNDS: u64 = 1_000_000;

/// Largest denominator exponent accepted in one of Bob's increments. Exact
/// sums of weights near `2^-e` cost `O(e)` bits each, so runs that need
/// finer weights stop with [`GameError::PrecisionCap`].
pub const DEFAULT_PRECISION_CAP: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("game setup: {0}")]
    Setup(String),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    IndexOverflow(#[from] IndexOverflow),
    #[error("transcript rejected: {0}")]
    Replay(String),
    #[error("round {round}: increment 1/2^{exp} is finer than the precision cap 2^-{cap}")]
    PrecisionCap { round: u64, exp: u64, cap: u64 },
}

/// One increment `β(index) += by` (or `μ`).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Raise {
    pub index: Index,
    pub by: Dyadic,
}

/// Everything a player can do in one turn.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Move {
    Pass,
    /// Game I: Alice adds `value` to `D[level]`.
    Add { level: u64, value: Index },
    /// Game II: Alice raises `α(index)` by `weight` in sub-game `sub`.
    Place { sub: u64, index: Index, weight: Dyadic },
    /// Bob's increments.
    Raise(Vec<Raise>),
}

impl Move {
    pub fn is_pass(&self) -> bool {
        matches!(self, Move::Pass)
    }
}

pub(crate) fn check_precision(raises: &[Raise], cap: u64, round: u64) -> Result<(), GameError> {
    match raises.iter().map(|r| r.by.exponent()).max() {
        Some(exp) if exp > cap => Err(GameError::PrecisionCap { round, exp, cap }),
        _ => Ok(()),
    }
}

/// Applies Bob's increments to `w` after checking them: positive amounts
/// and a total that stays at most 1. Returns `(index, old, new)` per raise.
pub(crate) fn apply_bob_raises(
    w: &mut WeightMap,
    raises: &[Raise],
) -> Result<Vec<(Index, Dyadic, Dyadic)>, String> {
    if raises.is_empty() {
        return Err("empty raise list".into());
    }
    let added: Dyadic = raises.iter().map(|r| &r.by).sum();
    if raises.iter().any(|r| r.by.is_zero()) {
        return Err("zero increment".into());
    }
    if &(w.total() + &added) > &Dyadic::one() {
        return Err(format!("total would reach {}", w.total() + &added));
    }
    Ok(raises
        .iter()
        .map(|r| {
            let old = w.get(r.index);
            w.add(r.index, &r.by);
            (r.index, old, w.get(r.index))
        })
        .collect())
}
