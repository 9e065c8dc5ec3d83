use std::path::Path;
use std::process::{Command, Output};

fn beaverlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beaverlab"))
        .current_dir(dir)
        .env_remove("BEAVERLAB_CACHE")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn encode_prints_code_and_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let o = beaverlab(dir.path(), &["encode", "--program", "1000", "--n", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "00111001000\nroundtrip OK, output 1\n");
}

#[test]
fn encode_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let o = beaverlab(dir.path(), &["encode", "--program", "10x", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = beaverlab(dir.path(), &["encode", "--program", "1000", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn tabulate_rows_and_cache_coherence() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["tabulate", "--max-len", "4", "--max-steps", "8"];
    let cold = beaverlab(dir.path(), &args);
    assert_eq!(cold.status.code(), Some(0));
    let csv = stdout(&cold);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("stage_L,stage_t,n,B,BB,BP,BPprime"));
    assert!(csv.lines().any(|l| l == "4,8,4,1,1,0,0"), "{csv}");
    assert_eq!(csv.lines().count(), 1 + 2 + 3 + 4 + 5);
    assert!(!csv.contains('\r'));

    assert!(dir.path().join(".beaverlab-cache").is_dir());
    let warm = beaverlab(dir.path(), &args);
    assert_eq!(warm.stdout, cold.stdout);

    let single = beaverlab(dir.path(), &["--jobs", "1", "--cache-dir", "other", "tabulate", "--max-len", "4", "--max-steps", "8"]);
    assert_eq!(single.stdout, cold.stdout);
    assert!(dir.path().join("other").is_dir());
}

#[test]
fn tabulate_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["tabulate", "--max-len", "6", "--max-steps", "64", "--out", "a.csv"];
    assert_eq!(beaverlab(dir.path(), &args).status.code(), Some(0));
    let first = std::fs::read(dir.path().join("a.csv")).unwrap();
    std::fs::remove_dir_all(dir.path().join(".beaverlab-cache")).unwrap();
    assert_eq!(beaverlab(dir.path(), &args).status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), first);
}

#[test]
fn tabulate_over_enumeration_cap_is_a_resource_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = beaverlab(dir.path(), &["tabulate", "--max-len", "40", "--max-steps", "8"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn verify_kraft_reports_all_stages() {
    let dir = tempfile::tempdir().unwrap();
    let o = beaverlab(dir.path(), &["verify", "--suite", "kraft", "--max-len", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Σm ≤ 1 at all 12 stages"));
    assert!(stderr(&o).contains("config: "));
}

#[test]
fn games_are_reproducible_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    for (game, d) in [("game1", "--d"), ("game2", "--d"), ("game2-combined", "--d-max")] {
        let run = |file: &str| {
            beaverlab(
                dir.path(),
                &[game, "--a-seq", "const:0", d, "2", "--bob", "random", "--seed", "5", "--transcript", file],
            )
        };
        let a = run("a.jsonl");
        let b = run("b.jsonl");
        assert_eq!(a.status.code(), Some(0), "{game}: {}", stdout(&a));
        assert_eq!(a.stdout, b.stdout);
        let ta = std::fs::read(dir.path().join("a.jsonl")).unwrap();
        assert_eq!(ta, std::fs::read(dir.path().join("b.jsonl")).unwrap());
        assert!(stdout(&a).starts_with("outcome: "));

        let r = beaverlab(dir.path(), &["replay", "--transcript", "a.jsonl"]);
        assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
        assert!(stdout(&r).starts_with("replay OK"));
    }
}

#[test]
fn tampered_transcript_fails_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = beaverlab(
        dir.path(),
        &["game1", "--a-seq", "const:0", "--d", "1", "--bob", "greedy", "--transcript", "t.jsonl"],
    );
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("t.jsonl");
    let text = std::fs::read_to_string(&path).unwrap();
    let tampered = text.replacen("\"player\":\"B\",\"move\":\"pass\"", "\"player\":\"B\",\"move\":{\"raise\":[{\"index\":0,\"by\":\"1/2^1\"}]}", 1);
    let tampered = if tampered == text {
        text.replacen("\"level\":", "\"level\":1", 1)
    } else {
        tampered
    };
    std::fs::write(&path, tampered).unwrap();
    let r = beaverlab(dir.path(), &["replay", "--transcript", "t.jsonl"]);
    assert_eq!(r.status.code(), Some(1), "{}", stdout(&r));
}

#[test]
fn exit_codes_for_usage_and_round_cap() {
    let dir = tempfile::tempdir().unwrap();
    let bad_bot = beaverlab(dir.path(), &["game1", "--a-seq", "const:0", "--d", "1", "--bob", "clever"]);
    assert_eq!(bad_bot.status.code(), Some(2));
    let missing = beaverlab(dir.path(), &["game2", "--d", "1", "--bob", "greedy"]);
    assert_eq!(missing.status.code(), Some(2));
    let unknown = beaverlab(dir.path(), &["frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    let capped = beaverlab(
        dir.path(),
        &["game1", "--a-seq", "log", "--d", "1", "--bob", "greedy", "--max-rounds", "100"],
    );
    assert_eq!(capped.status.code(), Some(3));
    assert!(stdout(&capped).contains("Undecided"));
    let twolog = beaverlab(dir.path(), &["game1", "--a-seq", "twolog", "--d", "0", "--bob", "passive"]);
    assert_eq!(twolog.status.code(), Some(3), "{}", stderr(&twolog));
}

#[test]
fn config_file_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "# game defaults\na_seq=const:0\nd=1\nbob=passive\nmystery=1\n",
    )
    .unwrap();
    let o = beaverlab(dir.path(), &["--config", "run.conf", "game1", "--bob", "greedy"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("a-seq=const:0"));
    assert!(err.contains("bob=greedy"));
    assert!(err.contains("config key \"mystery\" is not used"));

    let o = Command::new(env!("CARGO_BIN_EXE_beaverlab"))
        .current_dir(dir.path())
        .env("BEAVERLAB_CACHE", "envcache")
        .args(["cache", "path"])
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "envcache\n");
    let o = beaverlab(dir.path(), &["--cache-dir", "flagcache", "cache", "path"]);
    assert_eq!(stdout(&o), "flagcache\n");

    beaverlab(dir.path(), &["tabulate", "--max-len", "2", "--max-steps", "4"]);
    let o = beaverlab(dir.path(), &["cache", "clear"]);
    assert_eq!(stdout(&o), "removed 2 cached tables from .beaverlab-cache\n");
}
