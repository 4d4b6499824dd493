use std::path::Path;
use std::process::{Command, Output};

mod common;
use common::{snapshot, TINY};

fn readervar(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_readervar"))
        .args(args)
        .current_dir(dir)
        .env_remove("READERVAR_THREADS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    std::fs::write(dir.join("run.toml"), text).unwrap();
    "run.toml".into()
}

#[test]
fn simulate_lists_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = readervar(&["simulate", "--config", &cfg, "--seed", "3", "--out", "o"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let listed = String::from_utf8(out.stdout).unwrap();
    for f in ["features.csv", "labels.csv", "truth.csv", "roster.csv"] {
        assert!(listed.contains(f), "{listed}");
        assert!(dir.path().join("o").join(f).is_file());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    for out in ["a", "b"] {
        let o = readervar(&["eval", "--config", &cfg, "--seed", "8", "--out", out], dir.path());
        assert!(o.status.success());
    }
    assert_eq!(snapshot(&dir.path().join("a")), snapshot(&dir.path().join("b")));
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("seed = 11\n", ""));
    let out = readervar(&["simulate", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing field: seed"));
}

#[test]
fn missing_config_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = readervar(&["eval", "--config", "nope.toml", "--seed", "1", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn divergence_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("learning_rate = 0.01", "learning_rate = 1e300"));
    let out = readervar(&["train", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("diverged"));
}

#[test]
fn bad_thread_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = Command::new(env!("CARGO_BIN_EXE_readervar"))
        .args(["simulate", "--config", &cfg, "--out", "o"])
        .current_dir(dir.path())
        .env("READERVAR_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &TINY.replace("[train]\n", "[train]\nlearning_rat = 1\n"));
    let out = readervar(&["train", "--config", &cfg, "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rat"));
}
