//! The `airdraw` binary driven as a subprocess.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn airdraw(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_airdraw"))
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .unwrap()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = airdraw(args, dir);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn train_alphabet(dir: &Path) {
    for c in 'a'..='z' {
        let trace = format!("{c}.jsonl");
        ok(&["synth", "--letter", &c.to_string(), "--out", &trace], dir);
        ok(
            &[
                "train",
                "--letter",
                &c.to_string(),
                "-i",
                &trace,
                "--templates",
                "t.json",
            ],
            dir,
        );
    }
}

#[test]
fn empty_trace_has_no_sessions() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("empty.jsonl"), "").unwrap();
    let out = airdraw(&["pipeline", "-i", "empty.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn corrupt_line_is_reported_by_number() {
    let dir = TempDir::new().unwrap();
    ok(&["synth", "--letter", "a", "--out", "a.jsonl"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("a.jsonl")).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[2] = r#"{"t_us": 20000, "la": [0, 0]"#;
    std::fs::write(dir.path().join("bad.jsonl"), lines.join("\n")).unwrap();
    let out = airdraw(&["pipeline", "-i", "bad.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn missing_input_is_a_data_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(
        airdraw(&["pipeline", "-i", "nope.jsonl"], dir.path())
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(airdraw(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(airdraw(&["synth"], dir.path()).status.code(), Some(2));
    assert_eq!(
        airdraw(&["synth", "--letter", "a", "--word", "ab"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        airdraw(&["synth", "--letter", "é"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        airdraw(&["classify", "-i", "x.jsonl"], dir.path())
            .status
            .code(),
        Some(2)
    );
    std::fs::write(dir.path().join("c.toml"), "[synth]\nletter_box = 3\n").unwrap();
    let out = airdraw(
        &["--config", "c.toml", "synth", "--letter", "a"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("letter_box"));
}

#[test]
fn help_lists_every_flag() {
    let dir = TempDir::new().unwrap();
    let help = ok(&["eval", "--help"], dir.path());
    for flag in [
        "--letters",
        "--size-in",
        "--trials",
        "--noise",
        "--seed",
        "--format",
        "--report-savings",
        "--words",
        "--config",
    ] {
        assert!(help.contains(flag), "{flag}");
    }
    let help = ok(&["serve", "--help"], dir.path());
    for flag in ["--addr", "--port", "--templates"] {
        assert!(help.contains(flag), "{flag}");
    }
}

#[test]
fn training_builds_the_alphabet_and_retrains_one_entry() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    train_alphabet(d);
    let before: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("t.json")).unwrap()).unwrap();
    assert_eq!(before["templates"].as_object().unwrap().len(), 26);

    ok(
        &[
            "synth", "--letter", "q", "--noise", "0.2", "--seed", "4", "--out", "q2.jsonl",
        ],
        d,
    );
    ok(
        &[
            "train",
            "--letter",
            "q",
            "-i",
            "q2.jsonl",
            "--templates",
            "t.json",
        ],
        d,
    );
    let after: Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("t.json")).unwrap()).unwrap();
    for c in 'a'..='z' {
        let key = c.to_string();
        assert_eq!(
            before["templates"][&key] == after["templates"][&key],
            c != 'q',
            "{c}"
        );
    }
    assert!(!d.join("t.json.tmp").exists());

    // End to end: a synthesized letter classifies as itself.
    ok(
        &[
            "synth",
            "--letter",
            "w",
            "--noise",
            "0.3",
            "--seed",
            "11",
            "--arm-deg",
            "-35",
            "--out",
            "w.jsonl",
        ],
        d,
    );
    let out = ok(&["pipeline", "-i", "w.jsonl", "--templates", "t.json"], d);
    let records: Vec<Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["prediction"]["letter"], "w");
    assert_eq!(
        records[0]["prediction"]["ranked"].as_array().unwrap().len(),
        26
    );
    let rotated = &records[0]["rotated"];
    assert_eq!(
        rotated["x"].as_array().unwrap().len(),
        records[0]["samples"].as_u64().unwrap() as usize
    );

    let out = ok(&["classify", "-i", "w.jsonl", "--templates", "t.json"], d);
    let p: Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(p["letter"], "w");
}

#[test]
fn multi_session_training_is_ambiguous() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["synth", "--letter", "a", "--out", "a.jsonl"], d);
    ok(
        &[
            "train",
            "--letter",
            "a",
            "-i",
            "a.jsonl",
            "--templates",
            "t.json",
        ],
        d,
    );
    let before = std::fs::read(d.join("t.json")).unwrap();
    ok(&["synth", "--word", "ab", "--out", "ab.jsonl"], d);
    let out = airdraw(
        &[
            "train",
            "--letter",
            "b",
            "-i",
            "ab.jsonl",
            "--templates",
            "t.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("ambiguous"));
    assert_eq!(std::fs::read(d.join("t.json")).unwrap(), before);

    std::fs::write(d.join("still.jsonl"), "").unwrap();
    let out = airdraw(
        &[
            "train",
            "--letter",
            "b",
            "-i",
            "still.jsonl",
            "--templates",
            "t.json",
        ],
        d,
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("ambiguous"));
}

#[test]
fn pipeline_refuses_incomplete_templates() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["synth", "--letter", "a", "--out", "a.jsonl"], d);
    ok(
        &[
            "train",
            "--letter",
            "a",
            "-i",
            "a.jsonl",
            "--templates",
            "t.json",
        ],
        d,
    );
    let out = airdraw(&["pipeline", "-i", "a.jsonl", "--templates", "t.json"], d);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("incomplete"), "{}", stderr(&out));
}

#[test]
fn pipeline_can_write_rotated_sessions() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    ok(&["synth", "--word", "pizza", "--out", "pizza.jsonl"], d);
    let out = ok(
        &["pipeline", "-i", "pizza.jsonl", "--rotated-dir", "rot"],
        d,
    );
    let records: Vec<Value> = out
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 5);
    for r in &records {
        let path = d.join(r["rotated_ref"].as_str().unwrap());
        let lines = std::fs::read_to_string(path).unwrap().lines().count();
        assert_eq!(lines as u64, r["samples"].as_u64().unwrap());
        assert!(r.get("prediction").is_none());
    }
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    std::fs::write(d.join("c.toml"), "[synth]\nsize_in = 6.0\nseed = 3\n").unwrap();
    let peak = |text: &str| {
        text.lines()
            .map(|l| {
                let v: Value = serde_json::from_str(l).unwrap();
                v["la"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|c| c.as_f64().unwrap().abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    };
    let small = ok(&["--config", "c.toml", "synth", "--letter", "o"], d);
    let big = ok(
        &[
            "--config",
            "c.toml",
            "synth",
            "--letter",
            "o",
            "--size-in",
            "12",
        ],
        d,
    );
    let plain = ok(&["synth", "--letter", "o"], d);
    assert_eq!(big, plain);
    assert!((peak(&big) / peak(&small) - 2.0).abs() < 1e-9);
}

#[test]
fn eval_reports() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let md = ok(
        &[
            "eval",
            "--letters",
            "ab",
            "--trials",
            "5",
            "--format",
            "markdown",
        ],
        d,
    );
    assert!(md.starts_with("| actual \\ predicted | a | b |"));
    let csv = ok(
        &["eval", "--letters", "ab", "--trials", "5", "--seed", "2"],
        d,
    );
    assert_eq!(
        csv,
        ok(
            &["eval", "--letters", "ab", "--trials", "5", "--seed", "2"],
            d
        )
    );
    assert!(csv.lines().last().unwrap().starts_with("mean accuracy,"));
    let savings = ok(&["eval", "--report-savings", "--words", "cake,wine"], d);
    let lines: Vec<&str> = savings.lines().collect();
    assert_eq!(lines[0], "connection,cake,wine");
    assert!(lines[3].starts_with("data transfer savings,"));
}
