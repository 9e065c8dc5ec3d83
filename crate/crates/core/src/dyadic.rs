//! Exact nonnegative dyadic rationals.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

/// A nonnegative rational `num / 2^exp`.
///
/// Always kept canonical: the numerator is odd, or the value is zero with
/// exponent zero. Structural equality therefore coincides with numeric
/// equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Dyadic {
    num: BigUint,
    exp: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("malformed dyadic literal {0:?}, expected \"<num>/2^<exp>\"")]
pub struct ParseDyadicError(pub String);

impl Dyadic {
    pub fn new(num: BigUint, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn zero() -> Self {
        Dyadic::default()
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int(v: u64) -> Self {
        Dyadic::new(BigUint::from(v), 0)
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u64) -> Self {
        Dyadic {
            num: BigUint::one(),
            exp: k,
        }
    }

    /// `2^k` for a signed exponent.
    pub fn pow2(k: i64) -> Self {
        if k >= 0 {
            Dyadic::new(BigUint::one() << k as u64, 0)
        } else {
            Dyadic::pow2_neg(k.unsigned_abs())
        }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp);
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Numerators of `self` and `other` brought to a common exponent.
    fn aligned(&self, other: &Dyadic) -> (BigUint, BigUint, u64) {
        let exp = self.exp.max(other.exp);
        (
            &self.num << (exp - self.exp),
            &other.num << (exp - other.exp),
            exp,
        )
    }

    /// Exact difference, or `None` if it would be negative.
    pub fn checked_sub(&self, other: &Dyadic) -> Option<Dyadic> {
        let (a, b, exp) = self.aligned(other);
        if a < b {
            None
        } else {
            Some(Dyadic::new(a - b, exp))
        }
    }

    /// `max(self - other, 0)`.
    pub fn saturating_sub(&self, other: &Dyadic) -> Dyadic {
        self.checked_sub(other).unwrap_or_default()
    }

    /// Multiplication by `2^k` (k may be negative). Exact.
    pub fn mul_pow2(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        if k >= 0 {
            let k = k as u64;
            if k <= self.exp {
                Dyadic {
                    num: self.num.clone(),
                    exp: self.exp - k,
                }
            } else {
                Dyadic {
                    num: &self.num << (k - self.exp),
                    exp: 0,
                }
            }
        } else {
            Dyadic {
                num: self.num.clone(),
                exp: self.exp + k.unsigned_abs(),
            }
        }
    }

    /// `floor(self)`.
    pub fn floor(&self) -> BigUint {
        &self.num >> self.exp
    }

    /// `floor(log2(self))`, or `None` for zero.
    fn floor_log2(&self) -> Option<i128> {
        (!self.is_zero()).then(|| self.num.bits() as i128 - 1 - self.exp as i128)
    }

    /// Smallest `j >= 0` with `2^-j <= self`; `None` for zero.
    pub fn ceil_neg_log2(&self) -> Option<u64> {
        if self.is_zero() {
            return None;
        }
        // self = num * 2^-exp with num >= 1; bits(num) - 1 = floor(log2 num).
        let floor_log = self.num.bits() - 1;
        if floor_log >= self.exp {
            return Some(0);
        }
        // 2^-j <= num * 2^-exp  <=>  j >= exp - log2(num)
        Some(self.exp - floor_log)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        // Different binary magnitudes decide without aligning, which would
        // otherwise shift by the full exponent gap.
        let (la, lb) = (self.floor_log2(), other.floor_log2());
        if la != lb {
            return la.cmp(&lb);
        }
        let (a, b, _) = self.aligned(other);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (a, b, exp) = self.aligned(rhs);
        Dyadic::new(a + b, exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + x)
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

/// Report form `num/2^exp`.
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = ParseDyadicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDyadicError(s.to_string());
        let (num, exp) = s.split_once("/2^").ok_or_else(err)?;
        let num: BigUint = num.parse().map_err(|_| err())?;
        let exp: u64 = exp.parse().map_err(|_| err())?;
        Ok(Dyadic::new(num, exp))
    }
}

impl serde::Serialize for Dyadic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Dyadic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
