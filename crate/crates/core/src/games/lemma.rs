use crate::dyadic::Dyadic;
use crate::weight::WeightMap;

/// Contribution of one entry `v > 0`: `Σ_{j >= j0} 2^-j = 2 * 2^-j0`, where
/// `j0` is the first level with `2^-j0 <= v` (clamped at 0).
pub(crate) fn entry_weight(v: &Dyadic) -> Dyadic {
    match v.ceil_neg_log2() {
        None => Dyadic::zero(),
        Some(j0) => Dyadic::pow2_neg(j0).mul_pow2(1),
    }
}

/// `Σ_{j>=0} 2^-j * #{i : β(i) >= 2^-j}`, exactly.
///
/// Evaluated in closed form: the finite sum over `j <= J`, with `J` the
/// largest entry level, plus the geometric tail `2^-J * |support|`.
pub fn lemma_weight(beta: &WeightMap) -> Dyadic {
    let levels: Vec<u64> = beta
        .iter()
        .filter_map(|(_, v)| v.ceil_neg_log2())
        .collect();
    let Some(&big_j) = levels.iter().max() else {
        return Dyadic::zero();
    };
    let mut total = Dyadic::from_int(levels.len() as u64).mul_pow2(-(big_j as i64));
    // counts[j] = #{i : level(i) <= j}
    let mut hist = vec![0u64; big_j as usize + 1];
    for &l in &levels {
        hist[l as usize] += 1;
    }
    let mut count = 0u64;
    for (j, h) in hist.iter().enumerate() {
        count += h;
        total += &Dyadic::from_int(count).mul_pow2(-(j as i64));
    }
    total
}

/// Running value of [`lemma_weight`] under pointwise raises.
#[derive(Debug, Clone, Default)]
pub struct LemmaTracker {
    value: Dyadic,
}

impl LemmaTracker {
    pub fn value(&self) -> &Dyadic {
        &self.value
    }

    /// Records that one entry moved from `old` to `new >= old`.
    pub fn update(&mut self, old: &Dyadic, new: &Dyadic) {
        let gained = entry_weight(new)
            .checked_sub(&entry_weight(old))
            .expect("entry weight is monotone");
        self.value += &gained;
    }
}
