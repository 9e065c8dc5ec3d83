//! Semicomputable sequences and the reductions between them: duplicate-free
//! merging of monotone pair approximations, grouping by a coordinate,
//! blockwise computable minorants, and disjoint interval allocation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dyadic::Dyadic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeqError {
    #[error("rule violation: {0}")]
    RuleViolation(String),
    #[error("work cap exceeded: {0}")]
    WorkCapExceeded(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// A natural number or `+∞`. `2^-∞` is taken to be zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ext {
    Fin(u64),
    Inf,
}

impl Ext {
    /// `2^-self`.
    pub fn weight(self) -> Dyadic {
        match self {
            Ext::Fin(v) => Dyadic::pow2_neg(v),
            Ext::Inf => Dyadic::zero(),
        }
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Ext::Fin(v) => Some(v),
            Ext::Inf => None,
        }
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::Fin(v) => write!(f, "{v}"),
            Ext::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Ext {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" | "+inf" => Ok(Ext::Inf),
            _ => s
                .parse()
                .map(Ext::Fin)
                .map_err(|_| SeqError::Parse(format!("bad extended natural {s:?}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Pairs

/// An integer pair `(x, y)` with `x <= y`; `y` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair {
    pub x: u64,
    pub y: Ext,
}

impl Pair {
    pub fn new(x: u64, y: Ext) -> Self {
        Pair { x, y }
    }

    pub fn finite(x: u64, y: u64) -> Self {
        Pair { x, y: Ext::Fin(y) }
    }

    pub fn is_ordered(&self) -> bool {
        Ext::Fin(self.x) <= self.y
    }

    /// `2^(x - y)`.
    pub fn weight(&self) -> Dyadic {
        match self.y {
            Ext::Fin(y) => Dyadic::pow2_neg(y - self.x),
            Ext::Inf => Dyadic::zero(),
        }
    }
}

/// Stage approximations `(x(n,k), y(n,k))`: `x` nondecreasing and `y`
/// nonincreasing in `k`.
pub trait PairApprox {
    fn approx(&self, n: u64, k: u64) -> Pair;
}

impl<F: Fn(u64, u64) -> Pair> PairApprox for F {
    fn approx(&self, n: u64, k: u64) -> Pair {
        self(n, k)
    }
}

/// Pair approximations given as explicit change points; a row holds its
/// last listed value for all later stages.
#[derive(Debug, Clone, Default)]
pub struct PairTable {
    rows: BTreeMap<u64, BTreeMap<u64, Pair>>,
}

impl PairTable {
    pub fn insert(&mut self, n: u64, k: u64, pair: Pair) {
        self.rows.entry(n).or_default().insert(k, pair);
    }

    pub fn rows(&self) -> u64 {
        self.rows.keys().next_back().map_or(0, |&n| n + 1)
    }

    pub fn stages(&self) -> u64 {
        self.rows
            .values()
            .filter_map(|r| r.keys().next_back())
            .max()
            .map_or(0, |&k| k + 1)
    }

    /// Parses CSV lines `n,k,x,y` (`y` may be `inf`). A header line
    /// starting with `n` and blank lines are skipped. Every row must
    /// define stage 0.
    pub fn from_csv(text: &str) -> Result<Self, SeqError> {
        let mut t = PairTable::default();
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('n') || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let [n, k, x, y] = f[..] else {
                return Err(SeqError::Parse(format!("expected n,k,x,y in {line:?}")));
            };
            let num = |s: &str| {
                s.parse::<u64>()
                    .map_err(|_| SeqError::Parse(format!("bad integer {s:?}")))
            };
            t.insert(num(n)?, num(k)?, Pair::new(num(x)?, y.parse()?));
        }
        if let Some((n, _)) = t.rows.iter().find(|(_, r)| !r.contains_key(&0)) {
            return Err(SeqError::Parse(format!("row {n} has no stage 0")));
        }
        Ok(t)
    }
}

impl PairApprox for PairTable {
    fn approx(&self, n: u64, k: u64) -> Pair {
        self.rows
            .get(&n)
            .and_then(|r| r.range(..=k).next_back())
            .map(|(_, &p)| p)
            .unwrap_or(Pair::new(0, Ext::Inf))
    }
}

/// A finite list of distinct ordered pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairList {
    pairs: Vec<Pair>,
}

impl PairList {
    pub fn new(pairs: Vec<Pair>) -> Result<Self, SeqError> {
        let mut seen = HashSet::new();
        for p in &pairs {
            if !p.is_ordered() {
                return Err(SeqError::RuleViolation(format!("pair {p:?} has x > y")));
            }
            if !seen.insert(*p) {
                return Err(SeqError::RuleViolation(format!("duplicate pair {p:?}")));
            }
        }
        Ok(PairList { pairs })
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// `Σ 2^(x_i - y_i)`, exactly.
    pub fn weight_sum(&self) -> Dyadic {
        self.pairs.iter().map(Pair::weight).sum()
    }
}

/// Output of [`dedup_merge`]: the merged list and the row each pair was
/// first seen in.
#[derive(Debug, Clone)]
pub struct MergedPairs {
    pub list: PairList,
    pub origin: Vec<u64>,
}

impl MergedPairs {
    /// Σ `2^(x-y)` over the pairs first emitted by row `n`.
    pub fn row_sum(&self, n: u64) -> Dyadic {
        self.list
            .pairs()
            .iter()
            .zip(&self.origin)
            .filter(|&(_, &o)| o == n)
            .map(|(p, _)| p.weight())
            .sum()
    }
}

/// Merges the stage approximations of rows `0..rows` over stages
/// `0..stages` in diagonal order (by `n + k`, then `n`), keeping only the
/// first appearance of each pair.
pub fn dedup_merge(
    pa: &impl PairApprox,
    rows: u64,
    stages: u64,
) -> Result<MergedPairs, SeqError> {
    let mut prev: Vec<Option<Pair>> = vec![None; rows as usize];
    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    let mut origin = Vec::new();
    let diagonals = (rows + stages).saturating_sub(1);
    for s in 0..diagonals {
        for n in 0..rows.min(s + 1) {
            let k = s - n;
            if k >= stages {
                continue;
            }
            let p = pa.approx(n, k);
            if !p.is_ordered() {
                return Err(SeqError::RuleViolation(format!(
                    "row {n} stage {k}: x > y in {p:?}"
                )));
            }
            if let Some(q) = prev[n as usize] {
                if p.x < q.x || p.y > q.y {
                    return Err(SeqError::RuleViolation(format!(
                        "row {n} stage {k}: {q:?} -> {p:?} is not monotone"
                    )));
                }
            }
            prev[n as usize] = Some(p);
            if seen.insert(p) {
                pairs.push(p);
                origin.push(n);
            }
        }
    }
    Ok(MergedPairs {
        list: PairList { pairs },
        origin,
    })
}

// ---------------------------------------------------------------------------
// Grouping

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Upper-semicomputed grouping: `a_n = min{y_i - n : x_i = n}` (axis X) or
/// `a_n = min{n - x_i : y_i = n}` (axis Y). Values only decrease as pairs
/// arrive; unseen `n` read as `+∞`.
#[derive(Debug, Clone)]
pub struct GroupMin {
    axis: Axis,
    values: BTreeMap<u64, u64>,
}

impl GroupMin {
    pub fn new(axis: Axis) -> Self {
        GroupMin {
            axis,
            values: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, p: &Pair) {
        let Ext::Fin(y) = p.y else { return };
        let (n, a) = match self.axis {
            Axis::X => (p.x, y - p.x),
            Axis::Y => (y, y - p.x),
        };
        self.values
            .entry(n)
            .and_modify(|v| *v = (*v).min(a))
            .or_insert(a);
    }

    pub fn value(&self, n: u64) -> Ext {
        self.values.get(&n).map_or(Ext::Inf, |&v| Ext::Fin(v))
    }

    /// Finite entries in increasing `n`.
    pub fn finite_values(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.values.iter().map(|(&n, &a)| (n, a))
    }

    /// `Σ_n 2^-a_n`.
    pub fn weight_sum(&self) -> Dyadic {
        self.values.values().map(|&a| Dyadic::pow2_neg(a)).sum()
    }
}

pub fn group_min(pl: &PairList, axis: Axis) -> GroupMin {
    let mut g = GroupMin::new(axis);
    for p in pl.pairs() {
        g.push(p);
    }
    g
}

// ---------------------------------------------------------------------------
// Sequences

/// A computable sequence of extended naturals.
pub trait NatSeq {
    fn value(&self, n: u64) -> Ext;

    /// `Σ_{n=lo..=hi} 2^-value(n)` in closed form, when the sequence has
    /// one. `None` means callers must sum term by term.
    fn closed_mass(&self, _lo: u64, _hi: u64) -> Option<Dyadic> {
        None
    }
}

impl<F: Fn(u64) -> Ext> NatSeq for F {
    fn value(&self, n: u64) -> Ext {
        self(n)
    }
}

/// The command-line sequence mini-language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqSpec {
    /// `const:c`
    Const(u64),
    /// `list:v0,v1,...`, then `+∞`
    List(Vec<u64>),
    /// `log`: `floor(log2(n+1))`, `Σ 2^-a_n` diverges
    Log,
    /// `twolog`: `2*floor(log2(n+1))`, `Σ 2^-a_n = 2`
    TwoLog,
}

fn floor_log2_succ(n: u64) -> u64 {
    127 - (n as u128 + 1).leading_zeros() as u64
}

impl SeqSpec {
    /// Σ over `n` in `lo..=hi` with `floor(log2(n+1)) = j` of `2^-(factor*j)`.
    fn log_mass(lo: u64, hi: u64, factor: u64) -> Dyadic {
        let mut total = Dyadic::zero();
        for j in 0..=64u32 {
            let seg_lo = (1u128 << j) - 1;
            let seg_hi = (1u128 << (j + 1)) - 2;
            let a = seg_lo.max(lo as u128);
            let b = seg_hi.min(hi as u128);
            if a <= b {
                let count = Dyadic::new((b - a + 1).into(), 0);
                total += &count.mul_pow2(-((factor * j as u64) as i64));
            }
        }
        total
    }
}

impl NatSeq for SeqSpec {
    fn value(&self, n: u64) -> Ext {
        match self {
            SeqSpec::Const(c) => Ext::Fin(*c),
            SeqSpec::List(v) => v.get(n as usize).map_or(Ext::Inf, |&x| Ext::Fin(x)),
            SeqSpec::Log => Ext::Fin(floor_log2_succ(n)),
            SeqSpec::TwoLog => Ext::Fin(2 * floor_log2_succ(n)),
        }
    }

    fn closed_mass(&self, lo: u64, hi: u64) -> Option<Dyadic> {
        if lo > hi {
            return Some(Dyadic::zero());
        }
        Some(match self {
            SeqSpec::Const(c) => Dyadic::new((hi as u128 - lo as u128 + 1).into(), *c),
            SeqSpec::List(v) => v
                .iter()
                .enumerate()
                .filter(|&(n, _)| (lo..=hi).contains(&(n as u64)))
                .map(|(_, &x)| Dyadic::pow2_neg(x))
                .sum(),
            SeqSpec::Log => SeqSpec::log_mass(lo, hi, 1),
            SeqSpec::TwoLog => SeqSpec::log_mass(lo, hi, 2),
        })
    }
}

impl FromStr for SeqSpec {
    type Err = SeqError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SeqError::Parse(format!("unknown sequence spec {s:?}"));
        match s {
            "log" => Ok(SeqSpec::Log),
            "twolog" => Ok(SeqSpec::TwoLog),
            _ => {
                if let Some(c) = s.strip_prefix("const:") {
                    c.parse().map(SeqSpec::Const).map_err(|_| bad())
                } else if let Some(l) = s.strip_prefix("list:") {
                    l.split(',')
                        .filter(|x| !x.is_empty())
                        .map(|x| x.trim().parse().map_err(|_| bad()))
                        .collect::<Result<_, _>>()
                        .map(SeqSpec::List)
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl fmt::Display for SeqSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqSpec::Const(c) => write!(f, "const:{c}"),
            SeqSpec::List(v) => {
                let parts: Vec<String> = v.iter().map(u64::to_string).collect();
                write!(f, "list:{}", parts.join(","))
            }
            SeqSpec::Log => f.write_str("log"),
            SeqSpec::TwoLog => f.write_str("twolog"),
        }
    }
}

/// Least `r >= lo` with `Σ_{n=lo..=r} 2^-a_n > target`.
///
/// Sequences with a closed-form mass are searched by bisection over the
/// whole 64-bit range; others are scanned for at most `scan_cap` terms.
pub fn first_exceeding(
    seq: &(impl NatSeq + ?Sized),
    lo: u64,
    target: &Dyadic,
    scan_cap: u64,
) -> Result<(u64, Dyadic), SeqError> {
    if let Some(full) = seq.closed_mass(lo, u64::MAX) {
        if &full <= target {
            return Err(SeqError::WorkCapExceeded(format!(
                "mass from {lo} never exceeds {target} below 2^64"
            )));
        }
        let (mut a, mut b) = (lo, u64::MAX);
        while a < b {
            let mid = a + (b - a) / 2;
            if &seq.closed_mass(lo, mid).expect("closed form") > target {
                b = mid;
            } else {
                a = mid + 1;
            }
        }
        return Ok((a, seq.closed_mass(lo, a).expect("closed form")));
    }
    let mut mass = Dyadic::zero();
    let mut n = lo;
    for _ in 0..scan_cap {
        mass += &seq.value(n).weight();
        if &mass > target {
            return Ok((n, mass));
        }
        n = n
            .checked_add(1)
            .ok_or_else(|| SeqError::WorkCapExceeded("scan ran past 2^64".into()))?;
    }
    Err(SeqError::WorkCapExceeded(format!(
        "mass from {lo} stayed <= {target} for {scan_cap} terms"
    )))
}

// ---------------------------------------------------------------------------
// Upper approximations and the computable minorant

/// Stage approximations of an upper-semicomputable sequence: nonincreasing
/// in `k`, eventually equal to the limit.
pub trait UpperSeq {
    fn approx(&self, n: u64, k: u64) -> Ext;
}

/// Upper approximations that are exact from stage 0.
#[derive(Debug, Clone)]
pub struct Settled<S>(pub S);

impl<S: NatSeq> UpperSeq for Settled<S> {
    fn approx(&self, n: u64, k: u64) -> Ext {
        let _ = k;
        self.0.value(n)
    }
}

/// Adversarial approximations: term `n` reads `a_n + (delay(n) - k)` until
/// stage `delay(n) = spread*n + offset`, after which it is exact.
#[derive(Debug, Clone)]
pub struct Delayed<S> {
    pub seq: S,
    pub spread: u64,
    pub offset: u64,
}

impl<S: NatSeq> UpperSeq for Delayed<S> {
    fn approx(&self, n: u64, k: u64) -> Ext {
        let delay = self.spread.saturating_mul(n).saturating_add(self.offset);
        match self.seq.value(n) {
            Ext::Fin(a) if k < delay => Ext::Fin(a.saturating_add(delay - k)),
            v => v,
        }
    }
}

/// A frozen block of the minorant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub start: u64,
    pub values: Vec<Ext>,
    /// `Σ 2^-ã_n` over the block; always `> 1`.
    pub mass: Dyadic,
    /// Approximation stage at which the block was frozen.
    pub stage: u64,
}

impl Block {
    pub fn end(&self) -> u64 {
        self.start + self.values.len() as u64
    }
}

/// Streams the computable minorant `ã_n >= a_n` block by block.
///
/// A block starting at `b` grows one term per refinement step while the
/// approximation stage advances by one; as soon as the current
/// approximations over the block have mass above 1 they are frozen.
#[derive(Debug, Clone)]
pub struct Minorant<U> {
    source: U,
    next_start: u64,
    stage: u64,
    step_cap: u64,
}

impl<U: UpperSeq> Minorant<U> {
    pub fn new(source: U, step_cap: u64) -> Self {
        Minorant {
            source,
            next_start: 0,
            stage: 0,
            step_cap,
        }
    }

    pub fn next_block(&mut self) -> Result<Block, SeqError> {
        let start = self.next_start;
        let one = Dyadic::one();
        for len in 1..=self.step_cap {
            let k = self.stage;
            self.stage += 1;
            let values: Vec<Ext> = (start..start + len)
                .map(|n| self.source.approx(n, k))
                .collect();
            let mass: Dyadic = values.iter().map(|v| v.weight()).sum();
            if mass > one {
                self.next_start = start + len;
                return Ok(Block {
                    start,
                    values,
                    mass,
                    stage: k,
                });
            }
        }
        Err(SeqError::WorkCapExceeded(format!(
            "block starting at {start} did not reach mass 1 within {} steps",
            self.step_cap
        )))
    }
}

/// The first `blocks` blocks of the minorant of `us`.
pub fn computable_minorant<U: UpperSeq>(
    us: U,
    blocks: usize,
    step_cap: u64,
) -> Result<Vec<Block>, SeqError> {
    let mut m = Minorant::new(us, step_cap);
    (0..blocks).map(|_| m.next_block()).collect()
}

/// A finite sequence assembled from minorant blocks; `+∞` beyond.
#[derive(Debug, Clone, Default)]
pub struct FrozenSeq {
    values: Vec<Ext>,
}

impl FrozenSeq {
    pub fn from_blocks(blocks: &[Block]) -> Self {
        FrozenSeq {
            values: blocks.iter().flat_map(|b| b.values.iter().copied()).collect(),
        }
    }
}

impl NatSeq for FrozenSeq {
    fn value(&self, n: u64) -> Ext {
        self.values.get(n as usize).copied().unwrap_or(Ext::Inf)
    }
}

// ---------------------------------------------------------------------------
// Interval allocation

/// `[lo, hi]` for parameter `d`, with its exact mass `Σ 2^-a_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub d: u64,
    pub lo: u64,
    pub hi: u64,
    pub mass: Dyadic,
}

impl Interval {
    /// The level range `[lo - d, hi - d]`.
    pub fn shifted(&self) -> (u64, u64) {
        (self.lo - self.d, self.hi - self.d)
    }
}

pub const DEFAULT_SCAN_CAP: u64 = 10_000_000;

/// Intervals `[l_d, r_d]`, `d = 0..=d_max`, each of mass `> 2^(d+1)`, with
/// pairwise disjoint shifted ranges `[l_d - d, r_d - d]`.
///
/// A running frontier `F` starts at 0; `l_d = F + d`, `r_d` is the least
/// index closing the mass, and `F` moves to `r_d - d + 1`.
pub fn allocate_intervals(
    seq: &(impl NatSeq + ?Sized),
    d_max: u64,
    scan_cap: u64,
) -> Result<Vec<Interval>, SeqError> {
    let mut frontier = 0u64;
    let mut out = Vec::new();
    for d in 0..=d_max {
        let lo = frontier
            .checked_add(d)
            .ok_or_else(|| SeqError::WorkCapExceeded("interval start past 2^64".into()))?;
        let (hi, mass) = first_exceeding(seq, lo, &Dyadic::pow2(d as i64 + 1), scan_cap)?;
        frontier = hi - d + 1;
        out.push(Interval { d, lo, hi, mass });
    }
    Ok(out)
}
