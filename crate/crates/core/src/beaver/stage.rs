use std::collections::BTreeMap;

use rayon::prelude::*;

use super::BeaverError;
use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::tinyvm::{enumerate_prefix_syntax, run_plain, run_prefix, RunOutcome};
use crate::weight::{Index, IndexOverflow, WeightMap};

/// Default ceiling on `2^(L+1)`, the number of plain programs of length `<= L`.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 26;

/// Approximation regime: programs of at most `max_len` bits, run for at
/// most `budget` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stage {
    pub max_len: usize,
    pub budget: u64,
}

impl Stage {
    pub fn new(max_len: usize, budget: u64) -> Self {
        Stage { max_len, budget }
    }

    pub fn dominates(&self, other: &Stage) -> bool {
        self.max_len >= other.max_len && self.budget >= other.budget
    }
}

#[derive(Debug, Clone, Copy)]
pub struct StageOptions {
    pub enumeration_cap: u64,
}

impl Default for StageOptions {
    fn default() -> Self {
        StageOptions {
            enumeration_cap: DEFAULT_ENUMERATION_CAP,
        }
    }
}

/// Snapshot of the semimeasure, minimal program lengths and halting
/// statistics at one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageTable {
    pub stage: Stage,
    /// `m(k)`: Σ `2^-|p|` over halting prefix programs with output `k`.
    pub m: WeightMap,
    /// Shortest halting plain program per output.
    pub ks: BTreeMap<Index, usize>,
    /// Shortest halting prefix program per output.
    pub kp: BTreeMap<Index, usize>,
    /// `maxout[n]`: largest output of a halting plain program of length `<= n`.
    pub maxout: Vec<Option<Index>>,
    /// `maxsteps[n]`: longest halting run among the same programs.
    pub maxsteps: Vec<Option<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Query {
    B,
    BB,
    BP,
    BPPrime,
}

impl std::str::FromStr for Query {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "B" => Ok(Query::B),
            "BB" => Ok(Query::BB),
            "BP" => Ok(Query::BP),
            "BP'" | "BPprime" | "BPPrime" => Ok(Query::BPPrime),
            other => Err(format!("unknown query kind {other:?}")),
        }
    }
}

/// One halting run: (program length, output, steps).
type Halting = (usize, Index, u64);

fn halting(len: usize, outcome: RunOutcome) -> Result<Option<Halting>, IndexOverflow> {
    match outcome {
        RunOutcome::Halt { output, steps } => {
            let k = u64::try_from(output).map_err(|_| IndexOverflow)?;
            Ok(Some((len, k, steps)))
        }
        _ => Ok(None),
    }
}

fn check_cap(max_len: usize, opts: &StageOptions) -> Result<(), BeaverError> {
    let needed = 1u128.checked_shl(max_len as u32 + 1).unwrap_or(u128::MAX);
    if max_len >= 127 || needed > opts.enumeration_cap as u128 {
        return Err(BeaverError::ResourceLimit {
            max_len,
            needed,
            cap: opts.enumeration_cap,
        });
    }
    Ok(())
}

/// Halting plain and prefix runs for every program of length `<= max_len`.
/// Output order is fixed (length, then lexicographic), independent of the
/// worker count.
fn run_all(max_len: usize, budget: u64) -> Result<(Vec<Halting>, Vec<Halting>), BeaverError> {
    let plain: Vec<(usize, u64)> = (0..=max_len)
        .flat_map(|len| (0..1u64 << len).map(move |v| (len, v)))
        .collect();
    let plain = plain
        .into_par_iter()
        .map(|(len, v)| halting(len, run_plain(&BitString::from_uint(v, len), budget)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let prefix = enumerate_prefix_syntax(max_len)
        .into_par_iter()
        .map(|p| halting(p.len(), run_prefix(&p, budget)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((plain, prefix))
}

fn aggregate(stage: Stage, plain: &[Halting], prefix: &[Halting]) -> StageTable {
    let max_len = stage.max_len;
    let mut m = WeightMap::new();
    let mut kp = BTreeMap::new();
    for &(len, k, _) in prefix.iter().filter(|h| h.0 <= max_len) {
        m.add(k, &Dyadic::pow2_neg(len as u64));
        kp.entry(k).and_modify(|l: &mut usize| *l = (*l).min(len)).or_insert(len);
    }
    let mut ks = BTreeMap::new();
    let mut out_at = vec![None::<Index>; max_len + 1];
    let mut steps_at = vec![None::<u64>; max_len + 1];
    for &(len, k, steps) in plain.iter().filter(|h| h.0 <= max_len) {
        ks.entry(k).and_modify(|l: &mut usize| *l = (*l).min(len)).or_insert(len);
        out_at[len] = out_at[len].max(Some(k));
        steps_at[len] = steps_at[len].max(Some(steps));
    }
    let running_max = |v: Vec<Option<u64>>| {
        v.into_iter()
            .scan(None, |acc: &mut Option<u64>, x| {
                *acc = (*acc).max(x);
                Some(*acc)
            })
            .collect::<Vec<_>>()
    };
    StageTable {
        stage,
        m,
        ks,
        kp,
        maxout: running_max(out_at),
        maxsteps: running_max(steps_at),
    }
}

pub fn compute_stage(stage: Stage) -> Result<StageTable, BeaverError> {
    compute_stage_with(stage, &StageOptions::default())
}

pub fn compute_stage_with(stage: Stage, opts: &StageOptions) -> Result<StageTable, BeaverError> {
    check_cap(stage.max_len, opts)?;
    let (plain, prefix) = run_all(stage.max_len, stage.budget)?;
    Ok(aggregate(stage, &plain, &prefix))
}

/// Tables for stages `(1, budget) ..= (max_len, budget)`, sharing one
/// enumeration pass.
pub fn compute_stage_ladder(
    max_len: usize,
    budget: u64,
    opts: &StageOptions,
) -> Result<Vec<StageTable>, BeaverError> {
    check_cap(max_len, opts)?;
    let (plain, prefix) = run_all(max_len, budget)?;
    Ok((1..=max_len)
        .map(|l| aggregate(Stage::new(l, budget), &plain, &prefix))
        .collect())
}

/// Least `N >= 0` with `Σ_{k > N} w(k) < 2^-n`.
pub fn bpprime_of(w: &WeightMap, n: u64) -> Index {
    let threshold = Dyadic::pow2_neg(n);
    let mut above = Dyadic::zero();
    for (k, v) in w.iter().rev() {
        let with_k = &above + v;
        if with_k >= threshold {
            return k;
        }
        above = with_k;
    }
    0
}

pub fn stage_query(tbl: &StageTable, kind: Query, n: u64) -> Result<Option<u64>, BeaverError> {
    if kind != Query::BPPrime && n > tbl.stage.max_len as u64 {
        return Err(BeaverError::Usage(format!(
            "{kind:?}({n}) needs n <= L = {}",
            tbl.stage.max_len
        )));
    }
    Ok(match kind {
        Query::B => tbl.maxout[n as usize],
        Query::BB => tbl.maxsteps[n as usize],
        Query::BP => tbl
            .kp
            .iter()
            .filter(|&(_, &len)| len as u64 <= n)
            .map(|(&k, _)| k)
            .next_back(),
        Query::BPPrime => Some(bpprime_of(&tbl.m, n)),
    })
}
