use beaverlab::checks::{self, Check, GameKind};
use beaverlab::games::{combined_alice2, game2_replay, BobKind};
use beaverlab::seqkit::SeqSpec;

use crate::{Ctx, Fail, Suite};

pub struct VerifyOpts {
    pub max_len: usize,
    pub budget: u64,
    pub seed: u64,
}

const RANDOM_SCHEDULES: usize = 1000;
const RANDOM_PAIR_LISTS: usize = 1000;
const GAME_D_MAX: u64 = 2;
const GAME_ROUNDS: u64 = 1_000_000;

pub fn verify(ctx: &Ctx, suite: Suite, opts: &VerifyOpts) -> Result<(), Fail> {
    let selected = match suite {
        Suite::All => vec![
            Suite::Kraft,
            Suite::Monotone,
            Suite::Cover,
            Suite::Encode,
            Suite::Games,
            Suite::Seqkit,
        ],
        s => vec![s],
    };
    let mut failed = 0;
    for s in selected {
        eprintln!("suite {s:?}");
        for c in run_suite(ctx, s, opts)? {
            println!("{c}");
            failed += usize::from(!c.passed);
        }
    }
    if failed > 0 {
        return Err(Fail::Violation(format!("{failed} check(s) failed")));
    }
    Ok(())
}

fn run_suite(ctx: &Ctx, suite: Suite, o: &VerifyOpts) -> Result<Vec<Check>, Fail> {
    Ok(match suite {
        Suite::Kraft => vec![checks::kraft(&ctx.ladder(o.max_len, o.budget)?)],
        Suite::Monotone => {
            let mut budgets = vec![1 << 4, 1 << 8, o.budget];
            budgets.sort_unstable();
            budgets.dedup();
            let grid = budgets
                .into_iter()
                .map(|t| ctx.ladder(o.max_len, t))
                .collect::<Result<Vec<_>, _>>()?;
            vec![checks::monotone(&grid)]
        }
        Suite::Cover => {
            let ladder = ctx.ladder(o.max_len, o.budget)?;
            let n_max = o.max_len.min(12) as u64;
            vec![checks::cover(&ladder, n_max, RANDOM_SCHEDULES, o.seed)]
        }
        Suite::Encode => vec![checks::encode_exhaustive(o.max_len.min(10), 1 << 10)],
        Suite::Games => {
            let bots: Vec<BobKind> = [BobKind::Passive, BobKind::Greedy, BobKind::Blind]
                .into_iter()
                .chain((1..=3).map(|i| BobKind::Random(o.seed + i)))
                .collect();
            let a = SeqSpec::Const(0);
            vec![
                checks::games(
                    &[GameKind::One, GameKind::Two],
                    std::slice::from_ref(&a),
                    GAME_D_MAX,
                    &bots,
                    GAME_ROUNDS,
                ),
                combined(&a, &bots),
            ]
        }
        Suite::Seqkit => vec![
            checks::seqkit_random(RANDOM_PAIR_LISTS, o.seed),
            checks::minorant(6, 10_000),
        ],
        Suite::All => unreachable!("expanded by the caller"),
    })
}

/// Combined Game II: `Σα < 1`, the lemma bound and a clean replay, for
/// every bot. Winning is not required here.
fn combined(a: &SeqSpec, bots: &[BobKind]) -> Check {
    let mut bad = Vec::new();
    for b in bots {
        match combined_alice2(a.clone(), GAME_D_MAX, &mut b.build(), 100_000) {
            Ok(run) if run.alpha_ok && run.lemma_ok => {
                if let Err(e) = game2_replay(&run.transcript) {
                    bad.push(format!("{b}: {e}"));
                }
            }
            Ok(_) => bad.push(format!("{b}: budget invariant violated")),
            Err(e) => bad.push(format!("{b}: {e}")),
        }
    }
    let (passed, detail) = if bad.is_empty() {
        (true, format!("Σα < 1 and lemma bound for d ≤ {GAME_D_MAX} against {} bots", bots.len()))
    } else {
        (false, bad.join("; "))
    };
    Check {
        name: "games-combined".into(),
        passed,
        detail,
    }
}
