#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;
use std::time::Duration;

pub fn fuzzcamp_bin() -> &'static str {
    env!("CARGO_BIN_EXE_fuzzcamp")
}

pub fn mock_generator_bin() -> &'static str {
    env!("CARGO_BIN_EXE_mock-generator")
}

pub fn mock_compiler_bin() -> &'static str {
    env!("CARGO_BIN_EXE_mock-compiler")
}

pub fn minicorpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/minicorpus")
}

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// labels.json: file name -> set of features present in the file.
pub fn load_labels() -> BTreeMap<String, BTreeSet<String>> {
    let text = std::fs::read_to_string(minicorpus_dir().join("labels.json")).expect("labels");
    let raw: BTreeMap<String, Vec<String>> = serde_json::from_str(&text).expect("labels json");
    raw.into_iter()
        .map(|(k, v)| (k, v.into_iter().collect()))
        .collect()
}

pub fn run_cli(cwd: &Path, args: &[&str]) -> Output {
    Command::new(fuzzcamp_bin())
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn fuzzcamp")
}

pub fn assert_cli_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} failed: status {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Strips wall-clock and duration fields so two seeded runs can be compared
/// byte for byte.
pub fn canonicalize_ledger(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let mut value: serde_json::Value = serde_json::from_str(line).expect("ledger line");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("startedAtMs");
            obj.remove("wallClock");
            if let Some(outcomes) = obj.get_mut("outcomes").and_then(|o| o.as_object_mut()) {
                for side in ["o0", "o3"] {
                    if let Some(level) = outcomes.get_mut(side).and_then(|l| l.as_object_mut()) {
                        level.remove("durations");
                    }
                }
            }
        }
        out.push_str(&serde_json::to_string(&value).expect("canonical line"));
        out.push('\n');
    }
    out
}

/// The shared end-to-end campaign: full CLI pipeline (extract -> cluster ->
/// campaign) against the mock generator and compiler, run exactly once.
pub struct E2eCampaign {
    _dir: tempfile::TempDir,
    pub root: PathBuf,
    pub ledger: PathBuf,
    pub centroids: PathBuf,
    pub campaign_elapsed: Duration,
}

pub const E2E_SEED: u64 = 20260810;
pub const E2E_MAX_TRIALS: u64 = 300;
pub const E2E_COMPILE_TIMEOUT: &str = "0.25";
pub const E2E_RUN_TIMEOUT: &str = "0.25";

pub fn campaign_args(centroids: &str, ledger: &str) -> Vec<String> {
    vec![
        "campaign".into(),
        "--centroids".into(),
        centroids.into(),
        "--generator-cmd".into(),
        format!("{} {{flags}} --seed {{seed}} -o {{output}}", mock_generator_bin()),
        "--compiler-cmd".into(),
        format!("{} {{optlevel}} {{input}} -o {{output}}", mock_compiler_bin()),
        "--compile-timeout".into(),
        E2E_COMPILE_TIMEOUT.into(),
        "--run-timeout".into(),
        E2E_RUN_TIMEOUT.into(),
        "--budget".into(),
        "60s".into(),
        "--max-trials".into(),
        E2E_MAX_TRIALS.to_string(),
        "--seed".into(),
        E2E_SEED.to_string(),
        "--workers".into(),
        "1".into(),
        "--artifacts".into(),
        "arts".into(),
        "--ledger".into(),
        ledger.into(),
    ]
}

static E2E: OnceLock<E2eCampaign> = OnceLock::new();

pub fn e2e_campaign() -> &'static E2eCampaign {
    E2E.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let root = dir.path().to_path_buf();

        let out = run_cli(
            &root,
            &[
                "extract",
                "--corpus",
                minicorpus_dir().to_str().unwrap(),
                "--out",
                "ds.jsonl",
            ],
        );
        assert_cli_ok(&out, "extract");

        let out = run_cli(
            &root,
            &[
                "cluster", "--dataset", "ds.jsonl", "--k", "2", "--seed", "4242", "--out",
                "cent.json",
            ],
        );
        assert_cli_ok(&out, "cluster");

        let args = campaign_args("cent.json", "ledger.jsonl");
        let arg_refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let started = std::time::Instant::now();
        let out = run_cli(&root, &arg_refs);
        let campaign_elapsed = started.elapsed();
        assert_cli_ok(&out, "campaign");

        E2eCampaign {
            ledger: root.join("ledger.jsonl"),
            centroids: root.join("cent.json"),
            root,
            _dir: dir,
            campaign_elapsed,
        }
    })
}
