use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use trendlab::synth::GenConfig;

fn trendlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trendlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("stdout is json")
}

fn error_record(o: &Output) -> Value {
    assert!(!o.status.success());
    serde_json::from_slice(&o.stderr).expect("stderr is one json record")
}

/// A ~1k tweet world plus run keys, as a config file.
fn small_config(dir: &Path, seed: u64) -> String {
    let text = GenConfig::small(seed).to_kv_string() + "frames = \"10:2\"\nn_bootstrap = 40\n";
    fs::write(dir.join("small.toml"), text).unwrap();
    "small.toml".into()
}

#[test]
fn inverted_frame_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = trendlab(&["ratios", "missing.txt", "--frames", "2:10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = error_record(&o);
    assert_eq!(e["error"], "ConfigError");
    assert!(e["message"].as_str().unwrap().contains("(2, 10)"));
}

#[test]
fn bad_flags_and_keys_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["generate", "--alpha", "1.5"][..],
        &["detect", "c.txt", "--method", "magic"],
        &["frobnicate"],
        &["generate", "--frames", "10-2"],
    ] {
        assert_eq!(error_record(&trendlab(args, dir.path()))["error"], "ConfigError", "{args:?}");
    }
    fs::write(dir.path().join("bad.toml"), "no_such_knob = 3\n").unwrap();
    assert_eq!(error_record(&trendlab(&["generate", "--config", "bad.toml"], dir.path()))["error"], "ConfigError");
    fs::write(dir.path().join("range.toml"), "spam_fraction = 2.0\n").unwrap();
    assert_eq!(error_record(&trendlab(&["generate", "--config", "range.toml"], dir.path()))["error"], "ConfigError");
}

#[test]
fn file_and_integrity_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = trendlab(&["trends", "nope.txt"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_record(&o)["error"], "FileError");

    fs::write(dir.path().join("garbled.txt"), "U 0 regular organic active\nX what\n").unwrap();
    let e = error_record(&trendlab(&["trends", "garbled.txt"], dir.path()));
    assert_eq!(e["error"], "FileError");
    assert_eq!(e["line"], 2);

    // tweet by an author that does not exist
    fs::write(dir.path().join("orphan.txt"), "U 0 regular organic active\nT 0 7 0 k O\n").unwrap();
    let o = trendlab(&["trends", "orphan.txt"], dir.path());
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_record(&o)["error"], "IntegrityError");
}

#[test]
fn verify_generated_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let v = stdout_json(&trendlab(&["verify", "--seed", "11"], dir.path()));
    assert_eq!(v["passed"], true);
    let n = v["report"]["n_tweets"].as_u64().unwrap();
    assert!((300..=10_000).contains(&n), "{n}");
}

#[test]
fn stages_hand_off_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), 2);
    let d = dir.path();
    let g = stdout_json(&trendlab(&["generate", "--config", &cfg, "--out", "run"], d));
    assert!(g["summary"]["n_tweets"].as_u64().unwrap() > 0);
    assert!(d.join("run/config.toml").exists());

    let t = stdout_json(&trendlab(&["trends", "run/corpus.txt", "--out", "run"], d));
    assert!(t["n_trending_keywords"].as_u64().unwrap() > 0);
    assert!(d.join("run/trends/lifelines.csv").exists());

    stdout_json(&trendlab(&["ratios", "run/corpus.txt", "--config", &cfg, "--out", "run"], d));
    let fits: Value = serde_json::from_str(&fs::read_to_string(d.join("run/ratios/fits.json")).unwrap()).unwrap();
    assert_eq!(fits["before_removal"].as_array().unwrap().len(), 3);

    stdout_json(&trendlab(&["detect", "run/corpus.txt", "--out", "run"], d));
    let p = stdout_json(&trendlab(&["purge", "run/corpus.txt", "--suspects", "run/suspects.json", "--out", "run"], d));
    assert!(p["removal"]["n_removed_retweets"].as_u64().unwrap() > 0);

    // the cleaned corpus re-enters the pipeline and purging again removes nothing
    stdout_json(&trendlab(&["verify", "run/cleaned.txt"], d));
    let again = stdout_json(&trendlab(
        &["purge", "run/cleaned.txt", "--suspects", "run/suspects.json", "--out", "run2"],
        d,
    ));
    assert_eq!(again["removal"]["n_removed_retweets"], 0);
    assert_eq!(again["removal"]["n_removed_originals"], 0);
}

#[test]
fn threshold_detection_needs_no_moderation() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = small_config(d, 3);
    stdout_json(&trendlab(&["generate", "--config", &cfg], d));
    let v = stdout_json(&trendlab(&["detect", "trendlab-out/corpus.txt", "--method", "threshold:5"], d));
    assert_eq!(v["method"], "threshold:5");
}

#[test]
fn report_bundles_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = small_config(d, 4);
    for out in ["a", "b"] {
        stdout_json(&trendlab(&["report", "--config", &cfg, "--seed", "9", "--out", out], d));
    }
    let a = fs::read(d.join("a/manifest.json")).unwrap();
    assert_eq!(a, fs::read(d.join("b/manifest.json")).unwrap());
    let manifest: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(manifest["seed"], 9);
    assert!(trendlab::report::check_bundle(&d.join("a")).unwrap().is_empty());
    for f in manifest["files"].as_array().unwrap() {
        let p = f["path"].as_str().unwrap();
        assert_eq!(fs::read(d.join("a").join(p)).unwrap(), fs::read(d.join("b").join(p)).unwrap(), "{p}");
    }
}
