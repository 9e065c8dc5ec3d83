//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per
//! criterion (failing cells are listed indented below their line) and
//! exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use beaverlab::beaver::{
    compute_stage_ladder, modulus_of_convergence, stage_query, HalvingSeries, Query,
    StageOptions, StageTable, DEFAULT_MODULUS_WORK,
};
use beaverlab::checks::{self, game_cell, matrix_bots, GameKind};
use beaverlab::games::combined_alice2;
use beaverlab::seqkit::SeqSpec;
use beaverlab::Dyadic;

const BUDGETS: [u64; 3] = [1 << 4, 1 << 8, 1 << 14];
const MAX_LEN: usize = 14;
const GAME_ROUNDS: u64 = 1_000_000;
const SEED: u64 = 20_26;

struct Verdict {
    passed: bool,
    detail: String,
    notes: Vec<String>,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into(), notes: Vec::new() }
}

fn from_check(c: checks::Check) -> Verdict {
    verdict(c.passed, c.detail)
}

fn main() {
    let t0 = Instant::now();
    let grid: Vec<Vec<StageTable>> = BUDGETS
        .iter()
        .map(|&t| compute_stage_ladder(MAX_LEN, t, &StageOptions::default()).expect("stage grid"))
        .collect();
    eprintln!("stage grid L ≤ {MAX_LEN}, t ∈ {BUDGETS:?} in {:.1?}", t0.elapsed());

    let criteria: Vec<(u32, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, Box::new(|| kraft_and_monotone(&grid))),
        (2, Box::new(|| bp_ordering(&grid))),
        (3, Box::new(|| cover(&grid))),
        (4, Box::new(|| from_check(checks::encode_exhaustive(10, 1 << 10)))),
        (5, Box::new(brute_force_oracle)),
        (6, Box::new(|| from_check(checks::seqkit_random(1000, SEED)))),
        (7, Box::new(|| from_check(checks::minorant(6, 10_000)))),
        (8, Box::new(|| game_matrix(GameKind::One))),
        (9, Box::new(game_two)),
        (10, Box::new(|| modulus(&grid))),
        (11, Box::new(cli_reproducibility)),
    ];
    let mut failed = 0;
    for (n, run) in criteria {
        let start = Instant::now();
        let v = run();
        let word = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {n}: {word} {} [{:.1?}]", v.detail, start.elapsed());
        for note in &v.notes {
            println!("    {note}");
        }
        failed += usize::from(!v.passed);
    }
    println!("{} of 11 criteria pass", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn kraft_and_monotone(grid: &[Vec<StageTable>]) -> Verdict {
    let mut detail = Vec::new();
    let mut passed = true;
    for row in grid {
        let k = checks::kraft(row);
        passed &= k.passed;
        if !k.passed {
            detail.push(k.to_string());
        }
    }
    let m = checks::monotone(grid);
    passed &= m.passed;
    detail.push(m.detail);
    if passed {
        detail.insert(0, format!("Σm ≤ 1 at all {} stages;", grid.len() * MAX_LEN));
    }
    verdict(passed, detail.join(" "))
}

fn bp_ordering(grid: &[Vec<StageTable>]) -> Verdict {
    let mut compared = 0;
    for t in grid.iter().flatten() {
        for n in 0..=t.stage.max_len as u64 {
            let bp = stage_query(t, Query::BP, n).unwrap();
            let bpp = stage_query(t, Query::BPPrime, n).unwrap().expect("always defined");
            if let Some(bp) = bp {
                compared += 1;
                if bp > bpp {
                    return verdict(false, format!("BP({n}) = {bp} > BP'({n}) = {bpp} at {:?}", t.stage));
                }
            }
        }
    }
    verdict(true, format!("BP ≤ BP' at all {compared} defined points"))
}

fn cover(grid: &[Vec<StageTable>]) -> Verdict {
    let mut schedules: Vec<Vec<_>> = grid.iter().map(|row| row.iter().map(|t| t.m.clone()).collect()).collect();
    for l in 0..MAX_LEN {
        schedules.push(grid.iter().map(|row| row[l].m.clone()).collect());
    }
    for (i, s) in schedules.iter().enumerate() {
        if let Err(e) = checks::cover_schedule(s, 12) {
            return verdict(false, format!("stage schedule {i}: {e}"));
        }
    }
    let c = checks::cover(&grid[2], 12, 1000, SEED);
    verdict(c.passed, format!("{} stage schedules; {}", schedules.len(), c.detail))
}

// ---------------------------------------------------------------------------
// Independent interpreter for criterion 5

#[derive(Clone, Copy, PartialEq)]
enum Op {
    Inc,
    Dec,
    Right,
    Left,
    Open,
    Close,
    Double,
    Halt,
}

fn decode(bits: &[bool]) -> Option<(Vec<Op>, Vec<usize>)> {
    let one = bits.iter().position(|&b| b)?;
    let payload = &bits[one + 1..];
    let ops: Vec<Op> = payload
        .chunks_exact(3)
        .map(|c| match (c[0], c[1], c[2]) {
            (false, false, false) => Op::Inc,
            (false, false, true) => Op::Dec,
            (false, true, false) => Op::Right,
            (false, true, true) => Op::Left,
            (true, false, false) => Op::Open,
            (true, false, true) => Op::Close,
            (true, true, false) => Op::Double,
            (true, true, true) => Op::Halt,
        })
        .collect();
    let mut jump = vec![usize::MAX; ops.len()];
    let mut stack = Vec::new();
    for (i, op) in ops.iter().enumerate() {
        match op {
            Op::Open => stack.push(i),
            Op::Close => {
                let j = stack.pop()?;
                jump[i] = j;
                jump[j] = i;
            }
            _ => {}
        }
    }
    stack.is_empty().then_some((ops, jump))
}

/// `(output, steps)` of a halting run within `budget` steps.
fn simulate(bits: &[bool], budget: u64) -> Option<(u128, u64)> {
    let (ops, jump) = decode(bits)?;
    let mut tape = vec![0u128];
    let (mut head, mut pc, mut steps) = (0usize, 0usize, 0u64);
    while pc < ops.len() {
        if steps == budget {
            return None;
        }
        steps += 1;
        let cell = &mut tape[head];
        match ops[pc] {
            Op::Inc => *cell += 1,
            Op::Dec => *cell = cell.saturating_sub(1),
            Op::Double => *cell = cell.checked_mul(2).expect("tiny programs stay small"),
            Op::Right => {
                head += 1;
                if head == tape.len() {
                    tape.push(0);
                }
            }
            Op::Left => head = head.saturating_sub(1),
            Op::Open if *cell == 0 => pc = jump[pc],
            Op::Close if *cell != 0 => pc = jump[pc],
            Op::Open | Op::Close => {}
            Op::Halt => return Some((tape[0], steps)),
        }
        pc += 1;
    }
    Some((tape[0], steps))
}

/// Self-delimiting header: `k` zeros, then `m = ℓ + 1` in `k + 1` bits.
fn prefix_body(bits: &[bool]) -> Option<&[bool]> {
    let k = bits.iter().position(|&b| b)?;
    let header = bits.get(k..2 * k + 1)?;
    let m = header.iter().fold(0usize, |acc, &b| 2 * acc + usize::from(b));
    let body = &bits[2 * k + 1..];
    (body.len() == m - 1).then_some(body)
}

fn brute_force_oracle() -> Verdict {
    const L: usize = 12;
    const T: u64 = 1 << 10;
    let mut b: BTreeMap<usize, u128> = BTreeMap::new();
    let mut bb: BTreeMap<usize, u64> = BTreeMap::new();
    let mut bp: BTreeMap<usize, u128> = BTreeMap::new();
    for len in 0..=L {
        for code in 0u64..1 << len {
            let bits: Vec<bool> = (0..len).rev().map(|i| code >> i & 1 == 1).collect();
            if let Some((out, steps)) = simulate(&bits, T) {
                let e = b.entry(len).or_default();
                *e = (*e).max(out);
                let e = bb.entry(len).or_default();
                *e = (*e).max(steps);
            }
            if let Some((out, _)) = prefix_body(&bits).and_then(|body| simulate(body, T)) {
                let e = bp.entry(len).or_default();
                *e = (*e).max(out);
            }
        }
    }
    let upto = |m: &BTreeMap<usize, u128>, n: usize| m.range(..=n).map(|(_, v)| *v).max();
    let table = &compute_stage_ladder(L, T, &StageOptions::default()).expect("stage")[L - 1];
    for n in 0..=L {
        let want = [
            upto(&b, n),
            bb.range(..=n).map(|(_, v)| *v as u128).max(),
            upto(&bp, n),
        ];
        let got = [Query::B, Query::BB, Query::BP]
            .map(|q| stage_query(table, q, n as u64).unwrap().map(u128::from));
        if want != got {
            return verdict(false, format!("n={n}: oracle {want:?}, table {got:?}"));
        }
    }
    verdict(true, format!("B, BB, BP agree with direct enumeration for n ≤ {L} at t = {T}"))
}

// ---------------------------------------------------------------------------
// Games

fn matrix_cells(kind: GameKind) -> (usize, Vec<String>) {
    let seqs: [SeqSpec; 2] = [SeqSpec::Const(0), SeqSpec::Log];
    let bots = matrix_bots(5);
    let mut cells = 0;
    let mut failures = Vec::new();
    for a in &seqs {
        for d in 0..=6 {
            for &bob in &bots {
                cells += 1;
                if let Err(e) = game_cell(kind, a, d, bob, GAME_ROUNDS) {
                    failures.push(format!("a={a} d={d} bob={bob}: {e}"));
                }
            }
        }
    }
    (cells, failures)
}

fn game_matrix(kind: GameKind) -> Verdict {
    let (cells, failures) = matrix_cells(kind);
    let mut v = verdict(
        failures.is_empty(),
        format!("Alice wins, replays and passes budget checks in {} of {cells} cells", cells - failures.len()),
    );
    v.notes = failures;
    v
}

fn game_two() -> Verdict {
    let mut v = game_matrix(GameKind::Two);
    let lemma_broken = v.notes.iter().any(|n| n.contains("lemma"));
    let mut combined_bad = Vec::new();
    for bob in matrix_bots(5) {
        match combined_alice2(SeqSpec::Const(0), 4, &mut bob.build(), GAME_ROUNDS) {
            Ok(run) if run.alpha_ok && run.lemma_ok => {}
            Ok(run) => combined_bad.push(format!(
                "combined bob={bob}: alpha_ok={} lemma_ok={}",
                run.alpha_ok, run.lemma_ok
            )),
            Err(e) => combined_bad.push(format!("combined bob={bob}: {e}")),
        }
    }
    v.detail = format!(
        "{}; lemma bound {}; combined d_max=4 keeps Σα < 1 against {} of 8 bots",
        v.detail,
        if lemma_broken { "violated" } else { "held in every run" },
        8 - combined_bad.len()
    );
    v.passed &= combined_bad.is_empty();
    v.notes.extend(combined_bad);
    v
}

// ---------------------------------------------------------------------------

fn modulus(grid: &[Vec<StageTable>]) -> Verdict {
    let mut notes = Vec::new();
    for n in 0..=20u64 {
        let eps = Dyadic::pow2_neg(n);
        let got = modulus_of_convergence(&HalvingSeries, &eps, DEFAULT_MODULUS_WORK);
        // The tail beyond N is 2^-(N+1); count up to the first N where it
        // drops below eps.
        let oracle = (0u64..).find(|&m| Dyadic::pow2_neg(m + 1) < eps).unwrap();
        if got != Ok(n + 1) {
            notes.push(format!(
                "halving series: N(2^-{n}) = {got:?}, expected {} (direct tail search gives {oracle})",
                n + 1
            ));
        }
    }
    let halving_ok = notes.is_empty();
    let mut compared = 0;
    for t in grid.iter().flatten() {
        for n in 0..=12u64 {
            let eps = Dyadic::pow2_neg(n);
            let got = modulus_of_convergence(&t.m, &eps, DEFAULT_MODULUS_WORK);
            let want = stage_query(t, Query::BPPrime, n).unwrap();
            compared += 1;
            if got.as_ref().ok() != want.as_ref() {
                notes.push(format!("{:?} n={n}: modulus {got:?}, BP' {want:?}", t.stage));
            }
        }
    }
    let stage_ok = notes.len() == if halving_ok { 0 } else { 21 };
    let mut v = verdict(
        halving_ok && stage_ok,
        format!(
            "halving series N(2^-n) = n+1 for n ≤ 20: {}; stage modulus = BP' at {compared} points: {}",
            if halving_ok { "yes" } else { "no" },
            if stage_ok { "yes" } else { "no" },
        ),
    );
    v.notes = notes;
    v
}

fn run_cli(dir: &Path, args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_beaverlab"))
        .current_dir(dir)
        .env_remove("BEAVERLAB_CACHE")
        .args(args)
        .output()
        .expect("binary runs");
    (o.status.code(), o.stdout)
}

fn cli_reproducibility() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let dir = dir.path();
    let (code, out) = run_cli(dir, &["verify", "--suite", "all", "--max-len", "12"]);
    if code != Some(0) {
        return verdict(false, format!("verify exited {code:?}: {}", String::from_utf8_lossy(&out)));
    }
    let runs: [&[&str]; 4] = [
        &["tabulate", "--max-len", "10", "--max-steps", "256", "--out", "OUT"],
        &["game1", "--a-seq", "const:0", "--d", "2", "--bob", "random", "--seed", "11", "--transcript", "OUT"],
        &["game2", "--a-seq", "const:0", "--d", "2", "--bob", "random", "--seed", "11", "--transcript", "OUT"],
        &["game2-combined", "--a-seq", "const:0", "--d-max", "3", "--bob", "greedy", "--transcript", "OUT"],
    ];
    for args in runs {
        let mut outputs = Vec::new();
        // Cold cache, warm cache, then cold again.
        for i in 0..3 {
            let file = format!("out{i}");
            let argv: Vec<&str> = ["--cache-dir", "cache"]
                .into_iter()
                .chain(args.iter().map(|a| if *a == "OUT" { file.as_str() } else { a }))
                .collect();
            if i != 1 {
                let _ = std::fs::remove_dir_all(dir.join("cache"));
            }
            let (code, stdout) = run_cli(dir, &argv);
            if code != Some(0) {
                return verdict(false, format!("{args:?} exited {code:?}"));
            }
            outputs.push((stdout, std::fs::read(dir.join(&file)).expect("output file")));
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            return verdict(false, format!("{} output differs between runs", args[0]));
        }
    }
    verdict(true, "verify --suite all exits 0; CSV and transcripts byte-identical across runs and cache states")
}
