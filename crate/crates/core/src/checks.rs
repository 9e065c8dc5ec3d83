//! Invariant checks over stage tables, encodings, sequence reductions and
//! games. Each returns a [`Check`] with a one-line summary; the command
//! line `verify` suites are thin wrappers around these.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beaver::{
    bpprime_cover_enumerate, encode_plain_as_prefix, encoded_len, stage_query, Query, StageTable,
};
use crate::bits::BitString;
use crate::dyadic::Dyadic;
use crate::games::{
    game1_accounting, game1_replay, game1_run, game2_replay, game2_run, BobKind, Game1Config,
    Game2Config, Outcome,
};
use crate::seqkit::{
    computable_minorant, dedup_merge, group_min, Axis, Delayed, Ext, NatSeq, Pair, PairApprox,
    PairList, PairTable, SeqError, SeqSpec,
};
use crate::tinyvm::{decode_plain, run_plain, run_prefix};
use crate::weight::WeightMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, result: Result<String, String>) -> Self {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        Check {
            name: name.into(),
            passed,
            detail,
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{}: {verdict} {}", self.name, self.detail)
    }
}

/// `Σ_k m(k) <= 1` in every table.
pub fn kraft(tables: &[StageTable]) -> Check {
    let r = tables
        .iter()
        .find(|t| t.m.total() > &Dyadic::one())
        .map_or_else(
            || Ok(format!("Σm ≤ 1 at all {} stages", tables.len())),
            |t| Err(format!("Σm = {} at {:?}", t.m.total(), t.stage)),
        );
    Check::new("kraft", r)
}

fn queries(t: &StageTable, n: u64) -> [Option<u64>; 4] {
    [Query::B, Query::BB, Query::BP, Query::BPPrime].map(|q| {
        // n beyond L is only meaningful for BP'.
        stage_query(t, q, n).ok().flatten()
    })
}

/// Pairwise stage monotonicity between two tables with `small ⊑ big`.
fn stage_pair(small: &StageTable, big: &StageTable) -> Result<(), String> {
    let at = || format!("{:?} -> {:?}", small.stage, big.stage);
    if !big.m.dominates(&small.m) {
        return Err(format!("m decreases {}", at()));
    }
    for (lens_small, lens_big, name) in [(&small.ks, &big.ks, "ks"), (&small.kp, &big.kp, "kp")] {
        for (k, l) in lens_small {
            if lens_big.get(k).map_or(true, |lb| lb > l) {
                return Err(format!("{name}({k}) grows {}", at()));
            }
        }
    }
    for n in 0..=small.stage.max_len {
        if big.maxout[n] < small.maxout[n] || big.maxsteps[n] < small.maxsteps[n] {
            return Err(format!("B or BB at {n} decreases {}", at()));
        }
    }
    Ok(())
}

/// Stage monotonicity (in `L` and in `t`), argument monotonicity of all
/// four functions, and `BP(n) <= BP'(n)`. `grid[i][j]` must be the table
/// for the `i`-th budget and `j`-th length, both increasing.
pub fn monotone(grid: &[Vec<StageTable>]) -> Check {
    let run = || -> Result<String, String> {
        let mut pairs = 0;
        for (i, row) in grid.iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                if let Some(next) = row.get(j + 1) {
                    stage_pair(t, next)?;
                    pairs += 1;
                }
                if let Some(next) = grid.get(i + 1).and_then(|r| r.get(j)) {
                    stage_pair(t, next)?;
                    pairs += 1;
                }
                let mut prev = [None; 4];
                for n in 0..=t.stage.max_len as u64 {
                    let q = queries(t, n);
                    for (idx, name) in ["B", "BB", "BP", "BP'"].iter().enumerate() {
                        if q[idx] < prev[idx] {
                            return Err(format!("{name} decreases at n={n} in {:?}", t.stage));
                        }
                    }
                    if let (Some(bp), Some(bpp)) = (q[2], q[3]) {
                        if bp > bpp {
                            return Err(format!("BP({n})={bp} > BP'({n})={bpp} in {:?}", t.stage));
                        }
                    }
                    prev = q;
                }
            }
        }
        Ok(format!(
            "{} stages, {pairs} stage pairs, BP ≤ BP' everywhere",
            grid.iter().map(Vec::len).sum::<usize>()
        ))
    };
    Check::new("monotone", run())
}

/// Cover enumeration against a stage schedule: at most `2^n` emissions
/// and the last emission at least the final `BP'(n)`.
pub fn cover_schedule(snapshots: &[WeightMap], n_max: u64) -> Result<(), String> {
    let last = snapshots.last().cloned().unwrap_or_default();
    for n in 0..=n_max {
        let emitted = bpprime_cover_enumerate(n, snapshots).map_err(|e| e.to_string())?;
        if emitted.len() as u128 > 1u128 << n {
            return Err(format!("n={n}: {} emissions", emitted.len()));
        }
        let final_emit = emitted.last().copied().unwrap_or(0);
        let bpp = crate::beaver::bpprime_of(&last, n);
        if final_emit < bpp {
            return Err(format!("n={n}: last emission {final_emit} < BP' {bpp}"));
        }
    }
    Ok(())
}

/// A random monotone schedule of `steps` snapshots with total `<= 1`.
pub fn random_schedule(rng: &mut impl Rng, steps: usize, width: u64) -> Vec<WeightMap> {
    let mut w = WeightMap::new();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let room = Dyadic::one().saturating_sub(w.total());
        if !room.is_zero() && rng.gen_bool(0.8) {
            let by = room.mul_pow2(-rng.gen_range(1..=6i64));
            w.add(rng.gen_range(0..width), &by);
        }
        out.push(w.clone());
    }
    out
}

pub fn cover(ladder: &[StageTable], n_max: u64, random_schedules: usize, seed: u64) -> Check {
    let run = || -> Result<String, String> {
        let snaps: Vec<WeightMap> = ladder.iter().map(|t| t.m.clone()).collect();
        cover_schedule(&snaps, n_max)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..random_schedules {
            let s = random_schedule(&mut rng, 40, 64);
            cover_schedule(&s, n_max).map_err(|e| format!("random schedule {i}: {e}"))?;
        }
        Ok(format!(
            "≤ 2^n emissions and last ≥ BP'(n) for n ≤ {n_max}, stage schedule + {random_schedules} random"
        ))
    };
    Check::new("cover", run())
}

/// Every valid plain program of length `<= max_len`, each admissible `n`
/// in `|q|-2..=|q|+2`: same run as a prefix program, and the length
/// formula `2*floor(log2(n+3)) + 1 + n + 2`.
pub fn encode_exhaustive(max_len: usize, budget: u64) -> Check {
    let run = || -> Result<String, String> {
        let mut cases = 0u64;
        for len in 0..=max_len {
            for q in BitString::all_of_len(len) {
                if decode_plain(&q).is_err() {
                    continue;
                }
                let plain = run_plain(&q, budget);
                for n in (len as u64).saturating_sub(2)..=len as u64 + 2 {
                    let enc = encode_plain_as_prefix(&q, n).map_err(|e| format!("{q} n={n}: {e}"))?;
                    let log = 63 - (n + 3).leading_zeros() as usize;
                    if enc.len() != 2 * log + 1 + n as usize + 2 || enc.len() != encoded_len(n) {
                        return Err(format!("{q} n={n}: length {}", enc.len()));
                    }
                    if run_prefix(&enc, budget) != plain {
                        return Err(format!("{q} n={n}: runs differ"));
                    }
                    cases += 1;
                }
            }
        }
        Ok(format!("{cases} encodings round-trip (|q| ≤ {max_len}, t = {budget})"))
    };
    Check::new("encode", run())
}

/// Random monotone pair approximations: `rows` rows over `stages` stages.
pub fn random_pairs(rng: &mut impl Rng, rows: u64, stages: u64) -> PairTable {
    let mut t = PairTable::default();
    for n in 0..rows {
        let mut x = rng.gen_range(0..6u64);
        let mut y = if rng.gen_bool(0.1) {
            Ext::Inf
        } else {
            Ext::Fin(x + rng.gen_range(0..12u64))
        };
        t.insert(n, 0, Pair::new(x, y));
        for k in 1..stages {
            if rng.gen_bool(0.5) {
                continue;
            }
            if rng.gen_bool(0.5) {
                let room = match y {
                    Ext::Fin(yv) => yv - x,
                    Ext::Inf => 3,
                };
                x += rng.gen_range(0..=room.min(3));
            } else {
                y = match y {
                    Ext::Inf => Ext::Fin(x + rng.gen_range(0..12u64)),
                    Ext::Fin(yv) => Ext::Fin(yv - rng.gen_range(0..=(yv - x).min(3))),
                };
            }
            t.insert(n, k, Pair::new(x, y));
        }
    }
    t
}

/// Dedup inflation `<= 2x` per row and overall, and the grouping bound
/// `Σ 2^-a_n >= ½ Σ 2^(x-y)` on both axes.
pub fn seqkit_random(lists: usize, seed: u64) -> Check {
    let run = || -> Result<String, String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..lists {
            let rows = rng.gen_range(1..8u64);
            let stages = rng.gen_range(1..10u64);
            let t = random_pairs(&mut rng, rows, stages);
            let merged = dedup_merge(&t, rows, stages).map_err(|e| format!("list {i}: {e}"))?;
            let mut finals = Dyadic::zero();
            for n in 0..rows {
                let fin = t.approx(n, stages - 1).weight();
                if merged.row_sum(n) > fin.mul_pow2(1) {
                    return Err(format!("list {i} row {n}: inflation above 2x"));
                }
                finals += &fin;
            }
            let sum = merged.list.weight_sum();
            if sum > finals.mul_pow2(1) {
                return Err(format!("list {i}: total inflation above 2x"));
            }
            let distinct = PairList::new(merged.list.pairs().to_vec()).map_err(|e| e.to_string())?;
            for axis in [Axis::X, Axis::Y] {
                let g = group_min(&distinct, axis);
                if g.weight_sum().mul_pow2(1) < sum {
                    return Err(format!("list {i}: grouping bound fails on {axis:?}"));
                }
            }
        }
        Ok(format!("dedup ≤ 2x and grouping ≥ ½ on {lists} random lists"))
    };
    Check::new("seqkit", run())
}

/// Minorant blocks against adversarially delayed approximations: mass
/// above 1 and `ã_n >= a_n` on every block; `twolog` must exhaust the cap.
pub fn minorant(blocks: usize, step_cap: u64) -> Check {
    let run = || -> Result<String, String> {
        for spec in ["const:0", "const:3", "log"] {
            let a: SeqSpec = spec.parse().map_err(|e: SeqError| e.to_string())?;
            for (spread, offset) in [(0, 0), (1, 4), (2, 1)] {
                let src = Delayed { seq: a.clone(), spread, offset };
                let bs = computable_minorant(src, blocks, step_cap)
                    .map_err(|e| format!("{spec} delay {spread}n+{offset}: {e}"))?;
                for b in &bs {
                    if b.mass <= Dyadic::one() {
                        return Err(format!("{spec}: block at {} has mass {}", b.start, b.mass));
                    }
                    for (n, v) in (b.start..).zip(&b.values) {
                        if *v < a.value(n) {
                            return Err(format!("{spec}: minorant below a at {n}"));
                        }
                    }
                }
            }
        }
        let two: SeqSpec = "twolog".parse().map_err(|e: SeqError| e.to_string())?;
        match computable_minorant(Delayed { seq: two, spread: 1, offset: 4 }, blocks, step_cap) {
            Err(SeqError::WorkCapExceeded(_)) => {}
            other => return Err(format!("twolog: expected WorkCapExceeded, got {other:?}")),
        }
        Ok(format!(
            "{blocks} blocks each for const:0, const:3, log under 3 delays; twolog exceeds the cap"
        ))
    };
    Check::new("minorant", run())
}

/// Which game a cell runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameKind {
    One,
    Two,
}

/// One cell of the game matrix. Runs unrecorded first; a win is rerun with
/// a transcript and replayed, and the per-game budget checks are applied.
/// `Ok` carries the winning round count.
pub fn game_cell(
    kind: GameKind,
    a: &SeqSpec,
    d: u64,
    bob: BobKind,
    max_rounds: u64,
) -> Result<u64, String> {
    let tag = |o: &Outcome| format!("{} after {} rounds", o.label(), max_rounds.min(rounds_of(o)));
    match kind {
        GameKind::One => {
            let mut cfg = Game1Config::new(a.clone(), d);
            cfg.max_rounds = max_rounds;
            cfg.record = false;
            let quick = game1_run(&cfg, &mut bob.build()).map_err(|e| e.to_string())?;
            if !quick.outcome().is_alice_win() {
                return Err(tag(quick.outcome()));
            }
            cfg.record = true;
            let run = game1_run(&cfg, &mut bob.build()).map_err(|e| e.to_string())?;
            game1_replay(&run.transcript).map_err(|e| e.to_string())?;
            if let Some(l) = game1_accounting(a, d, &run.transcript.moves)
                .into_iter()
                .find(|l| !l.ok())
            {
                return Err(format!("level {} spend {} < {}", l.level, l.spend, l.bound));
            }
            Ok(run.rounds)
        }
        GameKind::Two => {
            let mut cfg = Game2Config::new(a.clone(), d);
            cfg.max_rounds = max_rounds;
            cfg.record = false;
            let quick = game2_run(&cfg, &mut bob.build()).map_err(|e| e.to_string())?;
            if !quick.lemma_ok {
                return Err("lemma bound violated".into());
            }
            if !quick.all_won() {
                return Err(tag(&quick.outcomes()[0]));
            }
            cfg.record = true;
            let run = game2_run(&cfg, &mut bob.build()).map_err(|e| e.to_string())?;
            game2_replay(&run.transcript).map_err(|e| e.to_string())?;
            Ok(run.rounds)
        }
    }
}

fn rounds_of(o: &Outcome) -> u64 {
    match o {
        Outcome::AliceWins { round, .. } => *round,
        Outcome::Undecided { rounds, .. } => *rounds,
        _ => u64::MAX,
    }
}

/// The adversaries of the game matrix.
pub fn matrix_bots(random_seeds: u64) -> Vec<BobKind> {
    let mut v = vec![BobKind::Passive, BobKind::Greedy];
    v.extend((1..=random_seeds).map(BobKind::Random));
    v.push(BobKind::Blind);
    v
}

/// Runs every cell of `kinds × seqs × 0..=d_max × bots` in parallel and
/// reports the failing cells.
pub fn games(
    kinds: &[GameKind],
    seqs: &[SeqSpec],
    d_max: u64,
    bots: &[BobKind],
    max_rounds: u64,
) -> Check {
    use rayon::prelude::*;
    let mut cells = Vec::new();
    for &k in kinds {
        for a in seqs {
            for d in 0..=d_max {
                for &b in bots {
                    cells.push((k, a.clone(), d, b));
                }
            }
        }
    }
    let failures: Vec<String> = cells
        .par_iter()
        .filter_map(|(k, a, d, b)| {
            game_cell(*k, a, *d, *b, max_rounds)
                .err()
                .map(|e| format!("{k:?} a={a} d={d} bob={b}: {e}"))
        })
        .collect();
    let r = if failures.is_empty() {
        Ok(format!("Alice wins and replays in all {} cells", cells.len()))
    } else {
        Err(format!("{} of {} cells fail; {}", failures.len(), cells.len(), failures.join("; ")))
    };
    Check::new("games", r)
}
