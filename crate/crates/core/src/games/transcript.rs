//! JSON-lines transcripts.
//!
//! Line 1 is the [`Header`], then one [`MoveLine`] per player turn, then
//! one [`Outcome`] line per sub-game. Field order is fixed by the struct
//! definitions, so equal games serialize to identical bytes.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{GameError, Move};
use crate::dyadic::Dyadic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub game: String,
    pub a: String,
    pub d: u64,
    pub bob: String,
    pub max_rounds: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    A,
    B,
}

/// Running total after the move, keyed by whose map it measures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Total {
    #[serde(rename = "mu_total")]
    Mu(Dyadic),
    #[serde(rename = "alpha_total")]
    Alpha(Dyadic),
    #[serde(rename = "beta_total")]
    Beta(Dyadic),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveLine {
    pub round: u64,
    pub player: Player,
    #[serde(rename = "move")]
    pub mv: Move,
    #[serde(flatten)]
    pub total: Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    AliceWins {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sub: Option<u64>,
        witness: Witness,
        round: u64,
    },
    Undecided {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sub: Option<u64>,
        rounds: u64,
    },
    RuleViolation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sub: Option<u64>,
        player: Player,
        reason: String,
    },
    StrategyExhausted {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sub: Option<u64>,
        reason: String,
    },
}

impl Outcome {
    pub fn is_alice_win(&self) -> bool {
        matches!(self, Outcome::AliceWins { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::AliceWins { .. } => "AliceWins",
            Outcome::Undecided { .. } => "Undecided",
            Outcome::RuleViolation { .. } => "RuleViolation",
            Outcome::StrategyExhausted { .. } => "StrategyExhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub header: Header,
    pub moves: Vec<MoveLine>,
    pub outcomes: Vec<Outcome>,
}

impl Transcript {
    pub fn write_jsonl(&self, mut w: impl Write) -> io::Result<()> {
        let mut line = |v: &dyn erased::Ser| -> io::Result<()> {
            w.write_all(v.json().as_bytes())?;
            w.write_all(b"\n")
        };
        line(&self.header)?;
        for m in &self.moves {
            line(m)?;
        }
        for o in &self.outcomes {
            line(o)?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn from_jsonl(text: &str) -> Result<Self, GameError> {
        let bad = |i: usize, e: serde_json::Error| GameError::Replay(format!("line {}: {e}", i + 1));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (i, first) = lines
            .next()
            .ok_or_else(|| GameError::Replay("empty transcript".into()))?;
        let header: Header = serde_json::from_str(first).map_err(|e| bad(i, e))?;
        let mut moves = Vec::new();
        let mut outcomes = Vec::new();
        for (i, l) in lines {
            let v: serde_json::Value = serde_json::from_str(l).map_err(|e| bad(i, e))?;
            if v.get("outcome").is_some() {
                outcomes.push(serde_json::from_value(v).map_err(|e| bad(i, e))?);
            } else if outcomes.is_empty() {
                moves.push(serde_json::from_value(v).map_err(|e| bad(i, e))?);
            } else {
                return Err(GameError::Replay(format!("line {}: move after outcome", i + 1)));
            }
        }
        Ok(Transcript {
            header,
            moves,
            outcomes,
        })
    }
}

mod erased {
    pub trait Ser {
        fn json(&self) -> String;
    }

    impl<T: serde::Serialize> Ser for T {
        fn json(&self) -> String {
            serde_json::to_string(self).expect("transcript values serialize")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::Raise;

    fn sample() -> Transcript {
        Transcript {
            header: Header {
                game: "game1".into(),
                a: "const:0".into(),
                d: 0,
                bob: "passive".into(),
                max_rounds: 10,
            },
            moves: vec![
                MoveLine {
                    round: 1,
                    player: Player::A,
                    mv: Move::Add { level: 0, value: 0 },
                    total: Total::Mu(Dyadic::zero()),
                },
                MoveLine {
                    round: 1,
                    player: Player::B,
                    mv: Move::Raise(vec![Raise {
                        index: 0,
                        by: Dyadic::pow2_neg(2),
                    }]),
                    total: Total::Mu(Dyadic::pow2_neg(2)),
                },
            ],
            outcomes: vec![Outcome::AliceWins {
                sub: None,
                witness: Witness { n: 0, u: None },
                round: 1,
            }],
        }
    }

    #[test]
    fn line_format() {
        let text = sample().to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            r#"{"game":"game1","a":"const:0","d":0,"bob":"passive","max_rounds":10}"#
        );
        assert_eq!(
            lines[1],
            r#"{"round":1,"player":"A","move":{"add":{"level":0,"value":0}},"mu_total":"0/2^0"}"#
        );
        assert_eq!(
            lines[2],
            r#"{"round":1,"player":"B","move":{"raise":[{"index":0,"by":"1/2^2"}]},"mu_total":"1/2^2"}"#
        );
        assert_eq!(
            lines[3],
            r#"{"outcome":"alice_wins","witness":{"n":0},"round":1}"#
        );
    }

    #[test]
    fn parse_round_trip() {
        let t = sample();
        assert_eq!(Transcript::from_jsonl(&t.to_jsonl()).unwrap(), t);
        let pass = r#"{"round":2,"player":"B","move":"pass","beta_total":"1/2^1"}"#;
        let m: MoveLine = serde_json::from_str(pass).unwrap();
        assert_eq!(m.mv, Move::Pass);
        assert_eq!(m.total, Total::Beta(Dyadic::pow2_neg(1)));
        assert!(Transcript::from_jsonl("").is_err());
        assert!(Transcript::from_jsonl("{\"game\":1}").is_err());
    }
}
