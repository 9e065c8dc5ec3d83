//! Game I: Alice enumerates sets `D_i` with `|D_i| <= 2^i`; Bob builds a
//! semimeasure `μ`. Alice wins the `d`-game if for some `n` in her interval
//! the `μ`-tail from `max D_{n-d}` stays below `2^-(n+a_n)`.

use std::collections::BTreeMap;

use super::bots::BobBot;
use super::transcript::{Header, MoveLine, Outcome, Player, Total, Transcript, Witness};
use super::{
    apply_bob_raises, check_precision, GameError, Move, Raise, DEFAULT_MAX_ROUNDS,
    DEFAULT_PRECISION_CAP,
};
use crate::dyadic::Dyadic;
use crate::seqkit::{allocate_intervals, Ext, Interval, NatSeq, SeqSpec, DEFAULT_SCAN_CAP};
use crate::weight::{next_index, Index, WeightMap};

#[derive(Debug, Clone)]
pub struct Game1Config {
    pub a: SeqSpec,
    pub d: u64,
    pub max_rounds: u64,
    pub scan_cap: u64,
    /// See [`DEFAULT_PRECISION_CAP`].
    pub precision_cap: u64,
    /// Keep the move list; summaries are produced either way.
    pub record: bool,
}

impl Game1Config {
    pub fn new(a: SeqSpec, d: u64) -> Self {
        Game1Config {
            a,
            d,
            max_rounds: DEFAULT_MAX_ROUNDS,
            scan_cap: DEFAULT_SCAN_CAP,
            precision_cap: DEFAULT_PRECISION_CAP,
            record: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Game1State {
    pub a: SeqSpec,
    pub d: u64,
    pub interval: Interval,
    /// `D_i`, each in insertion (hence increasing) order.
    pub sets: BTreeMap<u64, Vec<Index>>,
    pub mu: WeightMap,
    pub cursor: u64,
    pub round: u64,
    max_elem: Option<Index>,
}

/// `2^i`, saturating at `u128::MAX`.
fn capacity(level: u64) -> u128 {
    1u128.checked_shl(level as u32).filter(|_| level < 128).unwrap_or(u128::MAX)
}

impl Game1State {
    pub fn new(a: SeqSpec, d: u64, interval: Interval) -> Self {
        Game1State {
            cursor: interval.lo,
            a,
            d,
            interval,
            sets: BTreeMap::new(),
            mu: WeightMap::new(),
            round: 0,
            max_elem: None,
        }
    }

    pub fn mu(&self) -> &WeightMap {
        &self.mu
    }

    /// `2^-(n + a_n)`; zero when `a_n` is infinite.
    pub fn threshold(&self, n: u64) -> Dyadic {
        match self.a.value(n) {
            Ext::Fin(a) => Dyadic::pow2_neg(n.saturating_add(a)),
            Ext::Inf => Dyadic::zero(),
        }
    }

    pub fn set(&self, level: u64) -> &[Index] {
        self.sets.get(&level).map_or(&[], Vec::as_slice)
    }

    /// The `μ`-tail from `max D_{n-d}` when condition (*) holds at `n`.
    pub fn holds_at(&self, n: u64) -> Option<Dyadic> {
        let level = n.checked_sub(self.d)?;
        let &top = self.set(level).last()?;
        let tail = self.mu.tail(top);
        (tail < self.threshold(n)).then_some(tail)
    }

    /// Largest index Bob or Alice has used.
    pub fn max_used(&self) -> Option<Index> {
        self.mu.max_index().max(self.max_elem)
    }

    pub fn fresh_index(&self) -> Result<Index, GameError> {
        Ok(match self.max_used() {
            Some(m) => next_index(m)?,
            None => 0,
        })
    }

    pub fn bob_remaining(&self) -> Dyadic {
        Dyadic::one().saturating_sub(self.mu.total())
    }

    /// Cheapest raise that breaks (*) at the cursor: the missing tail
    /// weight, placed at `max D_{n-d}`.
    pub fn greedy_fix(&self) -> Option<Raise> {
        let tail = self.holds_at(self.cursor)?;
        let top = *self.set(self.cursor - self.d).last()?;
        Some(Raise {
            index: top,
            by: self.threshold(self.cursor).checked_sub(&tail)?,
        })
    }

    /// Every level obeys `|D_i| <= 2^i`, and every `D` element is below
    /// the next fresh index.
    pub fn rules_hold(&self) -> bool {
        self.sets
            .iter()
            .all(|(&i, s)| s.len() as u128 <= capacity(i) && s.windows(2).all(|w| w[0] < w[1]))
            && self.mu.total() <= &Dyadic::one()
    }
}

/// Some `n` in the interval at which (*) holds, scanning from the left.
pub fn win1_check(st: &Game1State) -> Option<u64> {
    let (lo, hi) = st.interval.shifted();
    st.sets
        .range(lo..=hi)
        .map(|(&level, _)| level + st.d)
        .find(|&n| st.holds_at(n).is_some())
}

/// Alice's decision for the current state: the cursor she targets after
/// skipping exhausted levels, and her move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alice1Plan {
    pub cursor: u64,
    pub mv: Move,
}

pub fn alice1_strategy(st: &Game1State) -> Result<Alice1Plan, GameError> {
    let mut n = st.cursor;
    loop {
        if n > st.interval.hi {
            return Err(GameError::Setup(format!(
                "cursor passed the interval end {}",
                st.interval.hi
            )));
        }
        if st.holds_at(n).is_some() {
            return Ok(Alice1Plan { cursor: n, mv: Move::Pass });
        }
        let level = n - st.d;
        if (st.set(level).len() as u128) < capacity(level) {
            let value = st.fresh_index()?;
            return Ok(Alice1Plan {
                cursor: n,
                mv: Move::Add { level, value },
            });
        }
        n += 1;
    }
}

/// Bob's spend attributable to one exhausted level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpend {
    pub n: u64,
    pub level: u64,
    /// Σ of Bob's increments at indices `>= k` made after Alice added `k`
    /// to this level and before her next addition.
    pub spend: Dyadic,
    /// `2^-(d + a_n)`.
    pub bound: Dyadic,
}

impl LevelSpend {
    pub fn ok(&self) -> bool {
        self.spend >= self.bound
    }
}

/// Per-level spend for every level Alice exhausted (moved her cursor past).
pub fn game1_accounting(
    a: &SeqSpec,
    d: u64,
    moves: &[MoveLine],
) -> Vec<LevelSpend> {
    let mut spend: BTreeMap<u64, Dyadic> = BTreeMap::new();
    let mut last: Option<(u64, Index)> = None;
    let mut top_level = None;
    for m in moves {
        match &m.mv {
            Move::Add { level, value } => {
                last = Some((*level, *value));
                top_level = top_level.max(Some(*level));
                spend.entry(*level).or_default();
            }
            Move::Raise(rs) => {
                if let Some((level, k)) = last {
                    let s = spend.entry(level).or_default();
                    for r in rs.iter().filter(|r| r.index >= k) {
                        *s += &r.by;
                    }
                }
            }
            _ => {}
        }
    }
    let Some(top) = top_level else { return Vec::new() };
    spend
        .into_iter()
        .filter(|&(level, _)| level < top)
        .map(|(level, spend)| {
            let n = level + d;
            let bound = match a.value(n) {
                Ext::Fin(an) => Dyadic::pow2_neg(d + an),
                Ext::Inf => Dyadic::zero(),
            };
            LevelSpend { n, level, spend, bound }
        })
        .collect()
}

/// Result of a run: the transcript (moves empty unless recorded) and the
/// final state.
#[derive(Debug, Clone)]
pub struct Game1Run {
    pub transcript: Transcript,
    pub state: Game1State,
    pub rounds: u64,
}

impl Game1Run {
    pub fn outcome(&self) -> &Outcome {
        &self.transcript.outcomes[0]
    }
}

pub fn game1_run(cfg: &Game1Config, bob: &mut BobBot) -> Result<Game1Run, GameError> {
    let interval = allocate_intervals(&cfg.a, cfg.d, cfg.scan_cap)?
        .pop()
        .expect("one interval per d");
    let mut st = Game1State::new(cfg.a.clone(), cfg.d, interval);
    let header = Header {
        game: "game1".into(),
        a: cfg.a.to_string(),
        d: cfg.d,
        bob: bob.name(),
        max_rounds: cfg.max_rounds,
    };
    let mut moves = Vec::new();
    let mut record = |line: MoveLine| {
        if cfg.record {
            moves.push(line);
        }
    };
    let mut outcome = None;
    for round in 1..=cfg.max_rounds {
        st.round = round;
        let plan = match alice1_strategy(&st) {
            Ok(p) => p,
            Err(e) => {
                outcome = Some(Outcome::StrategyExhausted {
                    sub: None,
                    reason: e.to_string(),
                });
                break;
            }
        };
        st.cursor = plan.cursor;
        if let Move::Add { level, value } = plan.mv {
            st.sets.entry(level).or_default().push(value);
            st.max_elem = Some(value);
        }
        record(MoveLine {
            round,
            player: Player::A,
            mv: plan.mv,
            total: Total::Mu(st.mu.total().clone()),
        });

        let mv = bob.move1(&st);
        if let Move::Raise(rs) = &mv {
            check_precision(rs, cfg.precision_cap, round)?;
            if let Err(reason) = apply_bob_raises(&mut st.mu, rs) {
                outcome = Some(Outcome::RuleViolation {
                    sub: None,
                    player: Player::B,
                    reason,
                });
                break;
            }
        } else if !mv.is_pass() {
            outcome = Some(Outcome::RuleViolation {
                sub: None,
                player: Player::B,
                reason: "Bob may only raise or pass".into(),
            });
            break;
        }
        let passed = mv.is_pass();
        record(MoveLine {
            round,
            player: Player::B,
            mv,
            total: Total::Mu(st.mu.total().clone()),
        });

        if let Some(tail) = st.holds_at(st.cursor) {
            let needed = st.threshold(st.cursor).checked_sub(&tail).expect("(*) holds");
            if passed || st.bob_remaining() < needed {
                outcome = Some(Outcome::AliceWins {
                    sub: None,
                    witness: Witness { n: st.cursor, u: None },
                    round,
                });
                break;
            }
        }
    }
    let rounds = st.round;
    let outcome = outcome.unwrap_or(Outcome::Undecided {
        sub: None,
        rounds: cfg.max_rounds,
    });
    Ok(Game1Run {
        transcript: Transcript {
            header,
            moves,
            outcomes: vec![outcome],
        },
        state: st,
        rounds,
    })
}

/// Re-referees a recorded transcript: Alice's moves are recomputed, Bob's
/// are replayed, and every line must match. Checks `|D_i| <= 2^i` and
/// `Σμ <= 1` after every round. Returns the final state.
pub fn game1_replay(t: &Transcript) -> Result<Game1State, GameError> {
    if t.header.game != "game1" {
        return Err(GameError::Replay(format!("not a game1 transcript: {}", t.header.game)));
    }
    let a: SeqSpec = t.header.a.parse()?;
    let bob_moves: Vec<Move> = t
        .moves
        .iter()
        .filter(|m| m.player == Player::B)
        .map(|m| m.mv.clone())
        .collect();
    let mut cfg = Game1Config::new(a, t.header.d);
    cfg.max_rounds = t.header.max_rounds;
    let mut bob = BobBot::Scripted { moves: bob_moves, pos: 0 };
    let mut run = game1_run(&cfg, &mut bob)?;
    run.transcript.header.bob = t.header.bob.clone();
    replay_rules(&run.transcript)?;
    if run.transcript != *t {
        let at = run
            .transcript
            .moves
            .iter()
            .zip(&t.moves)
            .position(|(x, y)| x != y)
            .map_or("the end".to_string(), |i| format!("move {}", i + 1));
        return Err(GameError::Replay(format!("transcript diverges at {at}")));
    }
    Ok(run.state)
}

/// Walks the move list and checks the per-round rules independently of
/// the referee.
fn replay_rules(t: &Transcript) -> Result<(), GameError> {
    let mut sizes: BTreeMap<u64, u128> = BTreeMap::new();
    let mut mu = WeightMap::new();
    for m in &t.moves {
        match &m.mv {
            Move::Add { level, .. } => {
                let s = sizes.entry(*level).or_default();
                *s += 1;
                if *s > capacity(*level) {
                    return Err(GameError::Replay(format!("D_{level} exceeds 2^{level}")));
                }
            }
            Move::Raise(rs) => {
                for r in rs {
                    mu.add(r.index, &r.by);
                }
                if mu.total() > &Dyadic::one() {
                    return Err(GameError::Replay(format!("round {}: Σμ > 1", m.round)));
                }
            }
            _ => {}
        }
    }
    Ok(())
}
