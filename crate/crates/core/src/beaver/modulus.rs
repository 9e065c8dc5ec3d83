use super::BeaverError;
use crate::dyadic::Dyadic;
use crate::weight::WeightMap;

pub const DEFAULT_MODULUS_WORK: u64 = 1 << 22;

/// A nonnegative series together with certified upper bounds on its tails.
pub trait CertifiedSeries {
    fn term(&self, k: u64) -> Dyadic;

    /// An upper bound on `Σ_{j >= k} a_j`. Must tend to zero.
    fn tail_bound(&self, k: u64) -> Dyadic;

    /// Whether [`tail_bound`](Self::tail_bound) is the exact tail.
    fn bound_is_exact(&self) -> bool {
        false
    }
}

/// `a_k = 2^-(k+1)`; the tail from `k` is exactly `2^-k`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HalvingSeries;

impl CertifiedSeries for HalvingSeries {
    fn term(&self, k: u64) -> Dyadic {
        Dyadic::pow2_neg(k + 1)
    }

    fn tail_bound(&self, k: u64) -> Dyadic {
        Dyadic::pow2_neg(k)
    }

    fn bound_is_exact(&self) -> bool {
        true
    }
}

impl CertifiedSeries for WeightMap {
    fn term(&self, k: u64) -> Dyadic {
        self.get(k)
    }

    fn tail_bound(&self, k: u64) -> Dyadic {
        self.tail(k)
    }

    fn bound_is_exact(&self) -> bool {
        true
    }
}

/// Least `N` with `Σ_{n > N} a_n < eps`.
///
/// For each candidate `N` the tail is bracketed by partial sums from below
/// and partial sums plus the declared bound from above, until one side
/// settles the strict comparison.
pub fn modulus_of_convergence<S: CertifiedSeries + ?Sized>(
    series: &S,
    eps: &Dyadic,
    work_cap: u64,
) -> Result<u64, BeaverError> {
    if eps.is_zero() {
        return Err(BeaverError::Usage("modulus needs eps > 0".into()));
    }
    let mut work = 0u64;
    for n in 0u64.. {
        let mut lower = Dyadic::zero();
        let mut m = n + 1;
        loop {
            work += 1;
            if work > work_cap {
                return Err(BeaverError::NoConvergence(work_cap));
            }
            let upper = &lower + &series.tail_bound(m);
            if &upper < eps {
                return Ok(n);
            }
            if &lower >= eps || series.bound_is_exact() {
                break;
            }
            lower += &series.term(m);
            m += 1;
        }
    }
    unreachable!("candidate range is unbounded")
}
