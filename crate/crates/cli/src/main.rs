//! `beaverlab`: tabulate stage functions, play the gap games, check
//! invariants.

mod config;
mod suites;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use beaverlab::beaver::{
    encode_plain_as_prefix, stage_query, BeaverError, Query, Stage, StageCache, StageOptions,
    StageTable,
};
use beaverlab::games::{
    game1_replay, game1_run, game2_replay, game2_run, BobKind, Game1Config, Game2Config,
    GameError, Outcome, Transcript, DEFAULT_MAX_ROUNDS,
};
use beaverlab::seqkit::{SeqError, SeqSpec};
use beaverlab::tinyvm::{run_plain, run_prefix, RunOutcome};
use beaverlab::BitString;

use config::Resolver;

const DEFAULT_CACHE_DIR: &str = ".beaverlab-cache";
const CACHE_ENV: &str = "BEAVERLAB_CACHE";

#[derive(Debug, Parser)]
#[command(name = "beaverlab", version, about = "Stage-bounded busy-beaver workbench")]
struct Cli {
    /// `key=value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Stage table cache directory (else $BEAVERLAB_CACHE, then the config file).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads for stage enumeration; results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, clap::Args)]
struct GameArgs {
    #[arg(long)]
    a_seq: Option<SeqSpec>,
    #[arg(long)]
    bob: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_rounds: Option<u64>,
    /// Write the full JSONL transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// CSV of B, BB, BP, BP' at stages (l, T) for l = 1..L.
    Tabulate {
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Game I: Alice keeps the gap condition against Bob's weights.
    Game1 {
        #[arg(long)]
        d: Option<u64>,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Game II: Alice places weight until a witness survives.
    Game2 {
        #[arg(long)]
        d: Option<u64>,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Game II for every d = 0..=d_max against a single Bob.
    Game2Combined {
        #[arg(long)]
        d_max: Option<u64>,
        #[command(flatten)]
        game: GameArgs,
    },
    /// Encode a plain program as a prefix program of length n.
    Encode {
        #[arg(long)]
        program: Option<BitString>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Re-referee a recorded transcript.
    Replay {
        #[arg(long)]
        transcript: PathBuf,
    },
    /// Run invariant suites; exits 0 iff all pass.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Inspect or clear the stage table cache.
    Cache {
        #[arg(value_enum)]
        action: CacheAction,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Kraft,
    Monotone,
    Cover,
    Encode,
    Games,
    Seqkit,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CacheAction {
    Path,
    Clear,
}

/// A failed command and its exit code.
#[derive(Debug)]
pub enum Fail {
    /// Exit 1: a property failed or Alice did not win.
    Violation(String),
    /// Exit 2.
    Usage(String),
    /// Exit 3: a work, round or enumeration cap was hit.
    Resource(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Violation(_) => 1,
            Fail::Usage(_) => 2,
            Fail::Resource(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fail::Violation(m) | Fail::Usage(m) | Fail::Resource(m) => m,
        }
    }
}

impl From<BeaverError> for Fail {
    fn from(e: BeaverError) -> Self {
        match e {
            BeaverError::ResourceLimit { .. } | BeaverError::NoConvergence(_) => {
                Fail::Resource(e.to_string())
            }
            BeaverError::Usage(_) | BeaverError::PadError { .. } | BeaverError::InvalidProgram(_) => {
                Fail::Usage(e.to_string())
            }
            _ => Fail::Violation(e.to_string()),
        }
    }
}

impl From<GameError> for Fail {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Setup(_) | GameError::Seq(SeqError::Parse(_)) => Fail::Usage(e.to_string()),
            GameError::Seq(SeqError::WorkCapExceeded(_))
            | GameError::IndexOverflow(_)
            | GameError::PrecisionCap { .. } => {
                Fail::Resource(e.to_string())
            }
            _ => Fail::Violation(e.to_string()),
        }
    }
}

fn io_fail(path: &Path, e: std::io::Error) -> Fail {
    Fail::Violation(format!("{}: {e}", path.display()))
}

/// Settings shared by every subcommand.
pub struct Ctx {
    pub cfg: Resolver,
    pub cache: StageCache,
}

impl Ctx {
    /// Stage tables `(l, budget)` for `l = 1..=max_len`, through the cache.
    pub fn ladder(&self, max_len: usize, budget: u64) -> Result<Vec<StageTable>, Fail> {
        (1..=max_len)
            .map(|l| {
                eprintln!("stage L={l} t={budget}");
                self.cache
                    .get_or_compute(Stage::new(l, budget), &StageOptions::default())
                    .map_err(Fail::from)
            })
            .collect()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Fail> {
    let cfg = Resolver::load(cli.config.as_deref())?;
    let jobs = cfg.get("jobs", cli.jobs, 0usize)?;
    if jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Fail::Usage(e.to_string()))?;
    }
    let cache_dir = cli
        .cache_dir
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .map(|p| p.display().to_string());
    let cache_dir = cfg.get("cache-dir", cache_dir, DEFAULT_CACHE_DIR.to_string())?;
    let ctx = Ctx {
        cfg,
        cache: StageCache::new(cache_dir),
    };
    let result = dispatch(&ctx, cli.cmd);
    for key in ctx.cfg.unused() {
        eprintln!("warning: config key {key:?} is not used by this command");
    }
    result
}

/// Logs the resolved configuration once all settings are known.
fn log_config(ctx: &Ctx) {
    eprintln!("config: {}", ctx.cfg.summary());
}

fn dispatch(ctx: &Ctx, cmd: Cmd) -> Result<(), Fail> {
    let cfg = &ctx.cfg;
    match cmd {
        Cmd::Tabulate { max_len, max_steps, out } => {
            let max_len = cfg.require("max-len", max_len)?;
            let budget = cfg.require("max-steps", max_steps)?;
            let out = cfg.optional("out", out.map(|p| p.display().to_string()));
            log_config(ctx);
            let tables = ctx.ladder(max_len, budget)?;
            let csv = tabulate_csv(&tables)?;
            emit(out.as_deref().map(Path::new), &csv)
        }
        Cmd::Game1 { d, game } => {
            let d = cfg.require("d", d)?;
            play(ctx, "game1", d, game)
        }
        Cmd::Game2 { d, game } => {
            let d = cfg.require("d", d)?;
            play(ctx, "game2", d, game)
        }
        Cmd::Game2Combined { d_max, game } => {
            let d = cfg.require("d-max", d_max)?;
            play(ctx, "game2-combined", d, game)
        }
        Cmd::Encode { program, n, budget } => {
            let q: BitString = cfg.require("program", program)?;
            let n = cfg.require("n", n)?;
            let budget = cfg.get("budget", budget, 1u64 << 10)?;
            log_config(ctx);
            encode(&q, n, budget)
        }
        Cmd::Replay { transcript } => {
            log_config(ctx);
            replay(&transcript)
        }
        Cmd::Verify { suite, max_len, max_steps, seed } => {
            let name = suite.and_then(|s| s.to_possible_value()).map(|v| v.get_name().to_string());
            let name = cfg.get("suite", name, "all".to_string())?;
            let suite = Suite::from_str(&name, true).map_err(Fail::Usage)?;
            let opts = suites::VerifyOpts {
                max_len: cfg.get("max-len", max_len, 12)?,
                budget: cfg.get("max-steps", max_steps, 1 << 10)?,
                seed: cfg.get("seed", seed, 0)?,
            };
            log_config(ctx);
            suites::verify(ctx, suite, &opts)
        }
        Cmd::Cache { action } => {
            log_config(ctx);
            match action {
                CacheAction::Path => println!("{}", ctx.cache.dir().display()),
                CacheAction::Clear => {
                    let n = ctx.cache.clear()?;
                    println!("removed {n} cached tables from {}", ctx.cache.dir().display());
                }
            }
            Ok(())
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), Fail> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_fail(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Fail::Violation(e.to_string())),
    }
}

pub fn tabulate_csv(tables: &[StageTable]) -> Result<String, Fail> {
    let mut csv = String::from("stage_L,stage_t,n,B,BB,BP,BPprime\n");
    for t in tables {
        for n in 0..=t.stage.max_len as u64 {
            let mut row = format!("{},{},{n}", t.stage.max_len, t.stage.budget);
            for q in [Query::B, Query::BB, Query::BP, Query::BPPrime] {
                row.push(',');
                if let Some(v) = stage_query(t, q, n)? {
                    row.push_str(&v.to_string());
                }
            }
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    Ok(csv)
}

fn play(ctx: &Ctx, game: &str, d: u64, args: GameArgs) -> Result<(), Fail> {
    let cfg = &ctx.cfg;
    let a: SeqSpec = cfg.require("a-seq", args.a_seq)?;
    let bob_name: String = cfg.require("bob", args.bob)?;
    let seed = cfg.get("seed", args.seed, 0)?;
    let max_rounds = cfg.get("max-rounds", args.max_rounds, DEFAULT_MAX_ROUNDS)?;
    let transcript = cfg.optional("transcript", args.transcript.map(|p| p.display().to_string()));
    log_config(ctx);
    let mut bob = BobKind::parse(&bob_name, seed)?.build();
    let record = transcript.is_some();

    let (t, summary) = match game {
        "game1" => {
            let mut c = Game1Config::new(a, d);
            c.max_rounds = max_rounds;
            c.record = record;
            let run = game1_run(&c, &mut bob)?;
            let summary = vec![
                format!("rounds: {}", run.rounds),
                format!("bob_total: {}", run.state.mu().total()),
                format!(
                    "alice_sets: {}",
                    run.state.sets.values().map(Vec::len).sum::<usize>()
                ),
            ];
            (run.transcript, summary)
        }
        _ => {
            let mut c = if game == "game2" {
                Game2Config::new(a, d)
            } else {
                Game2Config::combined(a, d)
            };
            c.max_rounds = max_rounds;
            c.record = record;
            let run = game2_run(&c, &mut bob)?;
            let summary = vec![
                format!("rounds: {}", run.rounds),
                format!("bob_total: {}", run.state.beta().total()),
                format!("alice_total: {}", run.state.alpha_total()),
                format!("lemma_weight: {}", run.state.lemma_value()),
                format!("lemma_bound_ok: {}", run.lemma_ok),
                format!("alpha_ok: {}", run.alpha_ok),
            ];
            if !(run.lemma_ok && run.alpha_ok) {
                print_outcomes(&run.transcript.outcomes, &summary);
                return Err(Fail::Violation("budget invariant violated".into()));
            }
            (run.transcript, summary)
        }
    };
    if let Some(path) = transcript {
        let path = Path::new(&path);
        fs::write(path, t.to_jsonl()).map_err(|e| io_fail(path, e))?;
        eprintln!("transcript written to {}", path.display());
    }
    print_outcomes(&t.outcomes, &summary);
    outcome_status(&t.outcomes)
}

fn print_outcomes(outcomes: &[Outcome], summary: &[String]) {
    for o in outcomes {
        let sub = match o {
            Outcome::AliceWins { sub, .. }
            | Outcome::Undecided { sub, .. }
            | Outcome::RuleViolation { sub, .. }
            | Outcome::StrategyExhausted { sub, .. } => sub.map(|s| format!("d={s} ")),
        };
        let detail = match o {
            Outcome::AliceWins { witness, round, .. } => match witness.u {
                Some(u) => format!("witness n={} u={u} at round {round}", witness.n),
                None => format!("witness n={} at round {round}", witness.n),
            },
            Outcome::Undecided { rounds, .. } => format!("no decision within {rounds} rounds"),
            Outcome::RuleViolation { player, reason, .. } => format!("{player:?}: {reason}"),
            Outcome::StrategyExhausted { reason, .. } => reason.clone(),
        };
        println!("outcome: {}{} {detail}", sub.unwrap_or_default(), o.label());
    }
    for line in summary {
        println!("{line}");
    }
}

fn outcome_status(outcomes: &[Outcome]) -> Result<(), Fail> {
    if outcomes.iter().all(Outcome::is_alice_win) {
        Ok(())
    } else if outcomes
        .iter()
        .any(|o| matches!(o, Outcome::RuleViolation { .. } | Outcome::StrategyExhausted { .. }))
    {
        Err(Fail::Violation("Alice did not win".into()))
    } else {
        Err(Fail::Resource("round cap reached before a decision".into()))
    }
}

fn encode(q: &BitString, n: u64, budget: u64) -> Result<(), Fail> {
    let enc = encode_plain_as_prefix(q, n)?;
    println!("{enc}");
    let plain = run_plain(q, budget);
    let prefix = run_prefix(&enc, budget);
    if plain != prefix {
        return Err(Fail::Violation(format!(
            "roundtrip FAILED: plain {plain:?}, prefix {prefix:?}"
        )));
    }
    match plain {
        RunOutcome::Halt { output, steps } => {
            println!("roundtrip OK, output {output}");
            eprintln!("halted after {steps} steps");
        }
        RunOutcome::StepLimit => println!("roundtrip OK, no halt within {budget} steps"),
        RunOutcome::Invalid => println!("roundtrip OK, invalid program"),
    }
    Ok(())
}

fn replay(path: &Path) -> Result<(), Fail> {
    let text = fs::read_to_string(path).map_err(|e| io_fail(path, e))?;
    let t = Transcript::from_jsonl(&text)?;
    let check = match t.header.game.as_str() {
        "game1" => game1_replay(&t).map(|_| ()),
        _ => game2_replay(&t).map(|_| ()),
    };
    check.map_err(|e| Fail::Violation(e.to_string()))?;
    println!(
        "replay OK: {} a={} d={} bob={}, {} moves",
        t.header.game,
        t.header.a,
        t.header.d,
        t.header.bob,
        t.moves.len()
    );
    print_outcomes(&t.outcomes, &[]);
    Ok(())
}
