use std::path::Path;
use std::process::{Command, Output};

use gwel::{Letter, ReducedWord};
use gwel_cli::parse::{format_word, parse_word};
use proptest::prelude::*;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_gwel");

fn gwel(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove(gwel_cli::THREADS_ENV)
        .output()
        .expect("spawn gwel")
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Nonzero exit with exactly one JSON line on stderr; returns the exit code.
fn expect_error(args: &[&str]) -> i32 {
    let out = gwel(args);
    let code = out.status.code().expect("exit code");
    assert_ne!(code, 0, "{args:?} should fail");
    let stderr = String::from_utf8(out.stderr).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{args:?}: stderr was {stderr:?}");
    let v: Value = serde_json::from_str(lines[0]).expect("stderr is JSON");
    assert_eq!(v["exit_code"].as_i64(), Some(code as i64));
    assert!(v["error"].is_string() && v["message"].is_string());
    assert!(out.stdout.is_empty());
    code
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("lattice.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const CONFIG: &str = "\
points = 4
weights = uniform
generator = (1 2)(3 4)
direction = decreasing
partition = 1 | 2 | 3 | 4
partition = 1 2 | 3 4
partition = 1 2 3 4
";

fn reduced(rank: u16, keys: &[usize]) -> ReducedWord {
    let letters: Vec<Letter> = keys
        .iter()
        .map(|&k| Letter::from_key(k % (2 * rank as usize), rank))
        .collect();
    gwel::free_words::reduce(rank, &letters).unwrap()
}

proptest! {
    #[test]
    fn word_text_round_trips(rank in 1u16..=3, keys in prop::collection::vec(0usize..6, 0..=8)) {
        let w = reduced(rank, &keys);
        let text = format_word(&w);
        prop_assert_eq!(parse_word(&text, rank).unwrap(), w);
    }
}

#[test]
fn every_verb_rejects_bad_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let bad_cfg = write_config(dir.path(), "points = 3\npartition = 1 2\n");
    let cases: Vec<Vec<&str>> = vec![
        vec!["walk-entropy", "--rank", "1"],
        vec!["walk-entropy", "--steps", "0"],
        vec!["drift", "--trials", "0"],
        vec!["growth", "--rank", "27"],
        vec!["cogrowth", "--quotient", "relators: a1"],
        vec!["cogrowth"],
        vec!["gap-check", "--quotient", "perm: a=(1 2 2)"],
        vec!["guivarch", "--steps", "0"],
        vec!["theorem-a", "--rank", "0"],
        vec!["boundary-entropy", "--measure", "a:0.5,b:0.25"],
        vec!["proximality", "--threshold", "1.5"],
        vec!["lattice-experiment", "--config", &bad_cfg],
        vec!["growth", "--seed", "banana"],
        vec!["no-such-verb"],
        vec![],
    ];
    for args in &cases {
        assert_eq!(expect_error(args), 2, "{args:?}");
    }
}

#[test]
fn resource_and_io_errors_have_their_own_codes() {
    assert_eq!(
        expect_error(&[
            "cogrowth",
            "--quotient",
            "relators: aaaaa, bbb, abAB",
            "--max-cosets",
            "4"
        ]),
        3
    );
    assert_eq!(
        expect_error(&["lattice-experiment", "--config", "/nonexistent/gwel.cfg"]),
        1
    );
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no/such/dir/out.json");
    assert_eq!(expect_error(&["growth", "--out", missing.to_str().unwrap()]), 1);
}

#[test]
fn reports_carry_version_params_and_units() {
    let v = stdout_json(&gwel(&["growth", "--rank", "2", "--steps", "3"]));
    assert_eq!(v["command"], "growth");
    assert!(v["tool_version"].as_str().unwrap().starts_with('v'));
    assert_eq!(v["units"], "nats");
    assert_eq!(v["params"]["rank"], 2);
    assert_eq!(v["params"]["steps"], 3);
    assert_eq!(v["seed"], 0xD0DD5);
    let counts: Vec<i64> = v["series"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r[1].as_i64().unwrap())
        .collect();
    assert_eq!(counts, vec![1, 5, 17, 53]);
}

#[test]
fn version_and_help_exit_cleanly() {
    let out = gwel(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(gwel_cli::report::tool_version()));
    let out = gwel(&["--help"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("0xD0DD5"));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let args = ["walk-entropy", "--steps", "20"];
    let direct = gwel(&args);
    assert!(direct.status.success());
    let mut with_out: Vec<&str> = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let written = gwel(&with_out);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn csv_has_header_and_rows() {
    let out = gwel(&["walk-entropy", "--steps", "5", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,H,H_over_n,increment");
    assert_eq!(lines.len(), 7);
    assert!(lines[1].starts_with("0,0"));

    let out = gwel(&["theorem-a", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("d,h_rw,ratio,bound\n"));
}

#[test]
fn thread_override_keeps_output_identical() {
    let args = ["drift", "--steps", "200", "--trials", "64"];
    let base = gwel(&args);
    assert!(base.status.success());
    for n in ["1", "3", "8"] {
        let mut with_flag: Vec<&str> = args.to_vec();
        with_flag.extend(["--threads", n]);
        assert_eq!(gwel(&with_flag).stdout, base.stdout, "--threads {n}");
        let env = Command::new(BIN)
            .args(args)
            .env(gwel_cli::THREADS_ENV, n)
            .output()
            .unwrap();
        assert_eq!(env.stdout, base.stdout, "{} {n}", gwel_cli::THREADS_ENV);
    }
    let bad = Command::new(BIN)
        .args(args)
        .env(gwel_cli::THREADS_ENV, "0")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn seed_changes_monte_carlo_output() {
    let a = stdout_json(&gwel(&["drift", "--steps", "100", "--trials", "50", "--seed", "1"]));
    let b = stdout_json(&gwel(&["drift", "--steps", "100", "--trials", "50", "--seed", "2"]));
    assert_eq!(a["seed"], 1);
    assert_ne!(a["summary"], b["summary"]);
}

#[test]
fn lattice_experiment_reads_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let v = stdout_json(&gwel(&["lattice-experiment", "--config", &cfg]));
    let rows = v["series"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][1], "1 2 | 3 4");
    let l2: Vec<f64> = rows.iter().map(|r| r[3].as_f64().unwrap()).collect();
    assert!(l2.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert_eq!(*l2.last().unwrap(), 0.0);
}
