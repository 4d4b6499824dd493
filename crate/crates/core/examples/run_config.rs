//! Drive the command layer from a config string, the same way the
//! `readervar` binary does, and read back what it wrote.
//!
//! `cargo run --example run_config`

use readervar::harness::{Command, RunConfig};

const CONFIG: &str = r#"
seed = 3

[simulation]
n_women = 200
q = 4
feature_dim = 16
cancer_intercept = -3.0
cancer_log_odds_slope = 0.03

[[reader]]
id = "R1"
noise_sd = 4.0

[[reader]]
id = "R2"
noise_sd = 6.0
knots = [[0, 0], [50, 62], [100, 100]]

[eval]
repeats = 200
readers = true
min_images = 50

[train]
max_epochs = 5
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("readervar_example_run");
    for cmd in [Command::Simulate, Command::Eval, Command::Train, Command::CaseControl] {
        let cfg = RunConfig::parse(CONFIG, std::path::Path::new("."), None, Some(out.join(cmd.name())))?;
        let files = cmd.run(&cfg)?;
        println!("{}: {} files under {}", cmd.name(), files.len(), cfg.out.display());
    }
    let cc = std::fs::read_to_string(out.join("casecontrol/casecontrol.csv"))?;
    print!("{cc}");
    Ok(())
}

#[test]
fn runs() {
    main().unwrap();
}
