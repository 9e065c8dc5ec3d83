use super::BeaverError;
use crate::dyadic::Dyadic;
use crate::weight::{next_index, Index, WeightMap};

/// Streaming form of [`bpprime_cover_enumerate`].
///
/// Watches a monotone sequence of semimeasure snapshots and emits a fresh
/// integer whenever the tail starting at the last emitted integer reaches
/// `2^-n`. Each emission leaves at least `2^-n` of weight below the new
/// integer, so at most `2^n` emissions can occur.
#[derive(Debug, Clone)]
pub struct CoverEnumerator {
    threshold: Dyadic,
    last: Index,
    emitted: Vec<Index>,
    current: WeightMap,
}

impl CoverEnumerator {
    pub fn new(n: u64) -> Self {
        CoverEnumerator {
            threshold: Dyadic::pow2_neg(n),
            last: 0,
            emitted: Vec::new(),
            current: WeightMap::new(),
        }
    }

    /// Feeds the next snapshot; returns the integers it caused to be emitted.
    pub fn push(&mut self, snapshot: &WeightMap) -> Result<Vec<Index>, BeaverError> {
        if !snapshot.dominates(&self.current) {
            return Err(BeaverError::RuleViolation(
                "snapshot decreases some weight".into(),
            ));
        }
        if snapshot.total() > &Dyadic::one() {
            return Err(BeaverError::RuleViolation(format!(
                "snapshot total {} exceeds 1",
                snapshot.total()
            )));
        }
        self.current = snapshot.clone();
        let before = self.emitted.len();
        while self.current.tail(self.last) >= self.threshold {
            let above_support = next_index(self.current.max_index().unwrap_or(0))?;
            let above_emitted = match self.emitted.last() {
                Some(&e) => next_index(e)?,
                None => 0,
            };
            self.last = above_support.max(above_emitted);
            self.emitted.push(self.last);
        }
        Ok(self.emitted[before..].to_vec())
    }

    pub fn emitted(&self) -> &[Index] {
        &self.emitted
    }

    /// Last emitted integer, or 0 before any emission.
    pub fn last(&self) -> Index {
        self.last
    }
}

pub fn bpprime_cover_enumerate(
    n: u64,
    snapshots: &[WeightMap],
) -> Result<Vec<Index>, BeaverError> {
    let mut e = CoverEnumerator::new(n);
    for s in snapshots {
        e.push(s)?;
    }
    Ok(e.emitted)
}
