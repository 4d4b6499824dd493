use std::path::Path;

use readervar::casecontrol::Roster;
use readervar::harness::{Command, RunConfig};
use readervar::Error;

mod common;
use common::{body, TINY};

fn run(cmd: Command, text: &str, dir: &Path, out: &str) -> readervar::Result<Vec<std::path::PathBuf>> {
    let cfg = RunConfig::parse(text, dir, None, Some(dir.join(out)))?;
    cmd.run(&cfg)
}

fn data_rows(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(String::from)
        .collect()
}

#[test]
fn label_matrix_has_four_cells() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Eval, TINY, dir.path(), "e").unwrap();
    let rows = data_rows(&dir.path().join("e/report_matrix.csv"));
    let cells: Vec<&str> = rows.iter().filter(|r| r.contains(",rmse,")).map(|r| r.split(',').next().unwrap()).collect();
    assert_eq!(cells, ["Av-Av:all", "Ind-Ind:all", "Av-Ind:all", "Ind-Av:all"]);
    assert_eq!(rows.len(), 8);
}

#[test]
fn simulated_files_reproduce_simulated_run() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Simulate, TINY, dir.path(), "sim").unwrap();
    run(Command::Eval, TINY, dir.path(), "direct").unwrap();
    let from_files = "seed = 11\n[data]\nfeatures = \"sim/features.csv\"\nlabels = \"sim/labels.csv\"\n[eval]\nrepeats = 100\n";
    run(Command::Eval, from_files, dir.path(), "files").unwrap();
    assert_eq!(
        body(&dir.path().join("direct/report_matrix.csv")),
        body(&dir.path().join("files/report_matrix.csv"))
    );
}

#[test]
fn small_subsets_are_listed_as_excluded() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY.replace("min_images = 10", "min_images = 400");
    run(Command::Eval, &text, dir.path(), "e").unwrap();
    let report = std::fs::read_to_string(dir.path().join("e/report_readers.csv")).unwrap();
    let excluded: Vec<&str> = report.lines().filter(|l| l.starts_with("# excluded")).collect();
    assert!(!excluded.is_empty(), "{report}");
    assert!(excluded.iter().all(|l| l.contains("< 400")));
}

#[test]
fn roster_group_without_controls_is_named() {
    let dir = tempfile::tempdir().unwrap();
    run(Command::Simulate, TINY, dir.path(), "sim").unwrap();
    let roster = Roster::load_csv(dir.path().join("sim/roster.csv")).unwrap();
    let group = roster.entries()[0].match_group;
    let kept: Vec<_> = roster
        .entries()
        .iter()
        .filter(|e| e.case || e.match_group != group)
        .cloned()
        .collect();
    Roster::new(kept).write_csv(dir.path().join("broken.csv"), None).unwrap();
    let text = "seed = 11\n[data]\nfeatures = \"sim/features.csv\"\nlabels = \"sim/labels.csv\"\nroster = \"broken.csv\"\n";
    let err = run(Command::CaseControl, text, dir.path(), "cc").unwrap_err();
    assert!(matches!(err, Error::CaseControl(_)));
    assert!(err.to_string().contains(&format!("match_group {group}")), "{err}");
}

#[test]
fn null_slope_odds_ratios_cover_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY
        .replace("n_women = 150", "n_women = 800")
        .replace("cancer_log_odds_slope = 0.02", "cancer_log_odds_slope = 0.0");
    run(Command::CaseControl, &text, dir.path(), "cc").unwrap();
    let rows = data_rows(&dir.path().join("cc/casecontrol.csv"));
    assert_eq!(rows.len(), 2);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        let (lo, hi): (f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        assert!(lo <= 1.0 && 1.0 <= hi, "{r}");
    }
}

#[test]
fn every_output_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::parse(TINY, dir.path(), Some(5), Some(dir.path().join("t"))).unwrap();
    let files = Command::Train.run(&cfg).unwrap();
    assert!(files.len() >= 4);
    for f in files {
        let first = std::fs::read_to_string(&f).unwrap().lines().next().unwrap().to_string();
        assert_eq!(first, format!("# readervar train config_sha256={} seed=5", cfg.config_hash), "{}", f.display());
    }
}

#[test]
fn seed_changes_simulated_output() {
    let dir = tempfile::tempdir().unwrap();
    for (seed, out) in [(1, "a"), (2, "b")] {
        let cfg = RunConfig::parse(TINY, dir.path(), Some(seed), Some(dir.path().join(out))).unwrap();
        Command::Simulate.run(&cfg).unwrap();
    }
    assert_ne!(body(&dir.path().join("a/labels.csv")), body(&dir.path().join("b/labels.csv")));
}

#[test]
fn multi_mode_trains_one_head_per_reader() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY.replace("[train]\n", "[train]\nmode = \"multi\"\n");
    run(Command::Train, &text, dir.path(), "t").unwrap();
    let rows = data_rows(&dir.path().join("t/train_summary.csv"));
    assert!(rows[0].starts_with("multi,3,"), "{}", rows[0]);
    let net = readervar::net::load_network(&dir.path().join("t/model.txt")).unwrap();
    assert_eq!(net.arch.output_count, 3);
}
