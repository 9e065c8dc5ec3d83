use std::collections::BTreeMap;

use thiserror::Error;

use crate::dyadic::Dyadic;

/// Natural-number index used for outputs, set elements and weight positions.
pub type Index = u64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("index arithmetic overflowed the 64-bit index range")]
pub struct IndexOverflow;

/// `i + 1`, reporting overflow instead of wrapping.
pub fn next_index(i: Index) -> Result<Index, IndexOverflow> {
    i.checked_add(1).ok_or(IndexOverflow)
}

/// A finite map from index to positive weight. Absent indices weigh zero.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct WeightMap {
    entries: BTreeMap<Index, Dyadic>,
    total: Dyadic,
}

impl WeightMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, i: Index) -> Dyadic {
        self.entries.get(&i).cloned().unwrap_or_default()
    }

    pub fn get_ref(&self, i: Index) -> Option<&Dyadic> {
        self.entries.get(&i)
    }

    /// Adds `v` to the weight at `i`. Zero increments are ignored.
    pub fn add(&mut self, i: Index, v: &Dyadic) {
        if v.is_zero() {
            return;
        }
        let slot = self.entries.entry(i).or_default();
        *slot += v;
        self.total += v;
    }

    /// Raises the weight at `i` to `v`; returns the increment applied
    /// (zero when `v` does not exceed the current weight).
    pub fn raise_to(&mut self, i: Index, v: &Dyadic) -> Dyadic {
        let inc = v.saturating_sub(&self.get(i));
        self.add(i, &inc);
        inc
    }

    pub fn total(&self) -> &Dyadic {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in increasing index order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (Index, &Dyadic)> {
        self.entries.iter().map(|(&i, v)| (i, v))
    }

    pub fn range_from(&self, from: Index) -> impl DoubleEndedIterator<Item = (Index, &Dyadic)> {
        self.entries.range(from..).map(|(&i, v)| (i, v))
    }

    /// Largest index carrying nonzero weight.
    pub fn max_index(&self) -> Option<Index> {
        self.entries.keys().next_back().copied()
    }

    /// Exact sum of the weights at indices `>= from`.
    pub fn tail(&self, from: Index) -> Dyadic {
        if from == 0 {
            return self.total.clone();
        }
        self.entries.range(from..).map(|(_, v)| v).sum()
    }

    /// True iff `self(i) >= other(i)` for every index.
    pub fn dominates(&self, other: &WeightMap) -> bool {
        other.iter().all(|(i, v)| self.get_ref(i).is_some_and(|w| w >= v))
    }
}

impl FromIterator<(Index, Dyadic)> for WeightMap {
    fn from_iter<T: IntoIterator<Item = (Index, Dyadic)>>(iter: T) -> Self {
        let mut w = WeightMap::new();
        for (i, v) in iter {
            w.add(i, &v);
        }
        w
    }
}

impl std::fmt::Debug for WeightMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// Σ over indices `i >= from` of `w(i)`, exactly.
pub fn weight_tail(w: &WeightMap, from: Index) -> Dyadic {
    w.tail(from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dy(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn tail_examples() {
        assert_eq!(weight_tail(&WeightMap::new(), 0), Dyadic::zero());
        let w: WeightMap = [(0, dy("1/2^2")), (5, dy("1/2^1"))].into_iter().collect();
        assert_eq!(weight_tail(&w, 1), dy("1/2^1"));
        assert_eq!(weight_tail(&w, 0), dy("3/2^2"));
        assert_eq!(weight_tail(&w, 6), Dyadic::zero());
    }

    #[test]
    fn raise_to_is_monotone() {
        let mut w = WeightMap::new();
        assert_eq!(w.raise_to(3, &dy("1/2^2")), dy("1/2^2"));
        assert_eq!(w.raise_to(3, &dy("1/2^3")), Dyadic::zero());
        assert_eq!(w.raise_to(3, &dy("1/2^1")), dy("1/2^2"));
        assert_eq!(w.total(), &dy("1/2^1"));
    }

    #[test]
    fn overflow_is_reported() {
        assert_eq!(next_index(u64::MAX), Err(IndexOverflow));
        assert_eq!(next_index(4), Ok(5));
    }

    fn arb_map() -> impl Strategy<Value = Vec<(u64, u64, u64)>> {
        proptest::collection::vec((0u64..40, 1u64..64, 0u64..12), 0..20)
    }

    proptest! {
        #[test]
        fn tail_is_monotone_and_additive(entries in arb_map(), a in 0u64..45, b in 0u64..45, i in 0u64..40, e in 0u64..12) {
            let w: WeightMap = entries
                .iter()
                .map(|&(i, n, e)| (i, Dyadic::new(n.into(), e)))
                .collect();
            let (lo, hi) = (a.min(b), a.max(b));
            prop_assert!(w.tail(lo) >= w.tail(hi));
            prop_assert_eq!(w.tail(0), w.iter().map(|(_, v)| v).sum::<Dyadic>());

            let v = Dyadic::pow2_neg(e);
            let mut w2 = w.clone();
            w2.add(i, &v);
            for j in 0..=i {
                prop_assert_eq!(w2.tail(j), &w.tail(j) + &v);
            }
            prop_assert_eq!(w2.tail(i + 1), w.tail(i + 1));
        }
    }
}
