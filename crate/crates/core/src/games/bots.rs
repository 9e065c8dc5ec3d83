use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::game1::Game1State;
use super::game2::Game2State;
use super::{GameError, Move, Raise};
use crate::beaver::{compute_stage_ladder, StageOptions};
use crate::dyadic::Dyadic;
use crate::weight::{Index, WeightMap};

/// Stage schedule replayed by the blind adversary: `m` at `L = 1..=10`,
/// `t = 2^10`.
pub const BLIND_MAX_LEN: usize = 10;
pub const BLIND_BUDGET: u64 = 1 << 10;

pub fn default_blind_schedule() -> &'static [WeightMap] {
    static SCHEDULE: OnceLock<Vec<WeightMap>> = OnceLock::new();
    SCHEDULE.get_or_init(|| {
        compute_stage_ladder(BLIND_MAX_LEN, BLIND_BUDGET, &StageOptions::default())
            .expect("blind schedule fits the default enumeration cap")
            .into_iter()
            .map(|t| t.m)
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BobKind {
    Greedy,
    Passive,
    Random(u64),
    Blind,
}

impl BobKind {
    /// Parses `greedy|passive|random|blind`; `seed` is used by `random`.
    pub fn parse(name: &str, seed: u64) -> Result<Self, GameError> {
        match name {
            "greedy" => Ok(BobKind::Greedy),
            "passive" => Ok(BobKind::Passive),
            "random" => Ok(BobKind::Random(seed)),
            "blind" => Ok(BobKind::Blind),
            other => Err(GameError::Setup(format!("unknown bot {other:?}"))),
        }
    }

    pub fn build(self) -> BobBot {
        match self {
            BobKind::Greedy => BobBot::Greedy,
            BobKind::Passive => BobBot::Passive,
            BobKind::Random(seed) => BobBot::Random {
                seed,
                rng: ChaCha8Rng::seed_from_u64(seed),
            },
            BobKind::Blind => BobBot::blind(default_blind_schedule().to_vec()),
        }
    }
}

impl fmt::Display for BobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BobKind::Greedy => f.write_str("greedy"),
            BobKind::Passive => f.write_str("passive"),
            BobKind::Random(seed) => write!(f, "random:{seed}"),
            BobKind::Blind => f.write_str("blind"),
        }
    }
}

impl FromStr for BobKind {
    type Err = GameError;

    /// Accepts the [`Display`](fmt::Display) form, e.g. `random:7`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once(':') {
            Some(("random", seed)) => seed
                .parse()
                .map(BobKind::Random)
                .map_err(|_| GameError::Setup(format!("bad seed in {s:?}"))),
            _ => BobKind::parse(s, 0),
        }
    }
}

/// Built-in adversaries.
///
/// * `Greedy` restores the opponent's violated condition with the least
///   weight at the least legal index, and passes when it cannot.
/// * `Passive` never moves.
/// * `Random` passes a third of the time, otherwise spends a random
///   `1/2`, `1/4` or `1/8` of its remaining budget at a random index.
/// * `Blind` raises its map to successive stage snapshots of the a priori
///   semimeasure, ignoring Alice entirely, then passes.
#[derive(Debug, Clone)]
pub enum BobBot {
    Greedy,
    Passive,
    Random { seed: u64, rng: ChaCha8Rng },
    Blind { schedule: Vec<WeightMap>, pos: usize },
    /// Replays recorded moves; used to re-referee transcripts.
    Scripted { moves: Vec<Move>, pos: usize },
}

impl BobBot {
    pub fn blind(schedule: Vec<WeightMap>) -> Self {
        BobBot::Blind { schedule, pos: 0 }
    }

    pub fn name(&self) -> String {
        match self {
            BobBot::Greedy => "greedy".into(),
            BobBot::Passive => "passive".into(),
            BobBot::Random { seed, .. } => format!("random:{seed}"),
            BobBot::Blind { .. } => "blind".into(),
            BobBot::Scripted { .. } => "scripted".into(),
        }
    }

    pub fn move1(&mut self, st: &Game1State) -> Move {
        self.respond(st.mu(), st.max_used(), || st.greedy_fix())
    }

    pub fn move2(&mut self, st: &Game2State) -> Move {
        self.respond(st.beta(), st.max_used(), || st.greedy_fix())
    }

    fn respond(
        &mut self,
        own: &WeightMap,
        max_used: Option<Index>,
        greedy: impl FnOnce() -> Option<Raise>,
    ) -> Move {
        let remaining = Dyadic::one().saturating_sub(own.total());
        match self {
            BobBot::Passive => Move::Pass,
            BobBot::Greedy => match greedy() {
                Some(r) if r.by <= remaining => Move::Raise(vec![r]),
                _ => Move::Pass,
            },
            BobBot::Random { rng, .. } => {
                if remaining.is_zero() || rng.gen_ratio(1, 3) {
                    return Move::Pass;
                }
                let hi = max_used.map_or(0, |m| m.saturating_add(4));
                let index = rng.gen_range(0..=hi);
                let by = remaining.mul_pow2(-rng.gen_range(1..=3i64));
                Move::Raise(vec![Raise { index, by }])
            }
            BobBot::Blind { schedule, pos } => {
                while let Some(snap) = schedule.get(*pos) {
                    *pos += 1;
                    let raises: Vec<Raise> = snap
                        .iter()
                        .filter_map(|(i, v)| {
                            let by = v.saturating_sub(&own.get(i));
                            (!by.is_zero()).then_some(Raise { index: i, by })
                        })
                        .collect();
                    let total: Dyadic = raises.iter().map(|r| &r.by).sum();
                    if !raises.is_empty() && total <= remaining {
                        return Move::Raise(raises);
                    }
                }
                Move::Pass
            }
            BobBot::Scripted { moves, pos } => {
                let m = moves.get(*pos).cloned().unwrap_or(Move::Pass);
                *pos += 1;
                m
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_parse_and_print() {
        for s in ["greedy", "passive", "random:7", "blind"] {
            assert_eq!(s.parse::<BobKind>().unwrap().to_string(), s);
        }
        assert_eq!(BobKind::parse("random", 3), Ok(BobKind::Random(3)));
        assert!("clever".parse::<BobKind>().is_err());
    }

    #[test]
    fn blind_schedule_is_monotone_semimeasure() {
        let s = default_blind_schedule();
        assert_eq!(s.len(), BLIND_MAX_LEN);
        for w in s.windows(2) {
            assert!(w[1].dominates(&w[0]));
        }
        assert!(s.last().unwrap().total() <= &Dyadic::one());
        assert!(!s.last().unwrap().is_empty());
    }
}
