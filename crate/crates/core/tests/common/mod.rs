//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;

/// Three readers, 150 women: every command finishes in well under a second.
pub const TINY: &str = r#"
seed = 11
out = "unused"

[simulation]
n_women = 150
q = 4
feature_dim = 12
cancer_intercept = -3.0
cancer_log_odds_slope = 0.02

[[reader]]
id = "A"
noise_sd = 4.0

[[reader]]
id = "B"
noise_sd = 6.0
attribute_weights = [2, 1, 1, 1]

[[reader]]
id = "C"
noise_sd = 5.0
knots = [[0, 0], [50, 40], [100, 100]]

[eval]
repeats = 100
readers = true
pairs = true
min_images = 10
sizes = [200, 600]
plot_pairs = [["A", "B"]]

[train]
hidden_widths = [6]
max_epochs = 4
learning_rate = 0.01

[compare]
repeat_seed = 3
repeats = 100
min_images = 5
"#;

pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for e in std::fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Contents of `path` without its leading provenance comment.
pub fn body(path: &Path) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().filter(|l| !l.starts_with("# readervar")).collect::<Vec<_>>().join("\n")
}
