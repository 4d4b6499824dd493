//! Config-driven commands: each reads one TOML file, applies `--seed` and
//! `--out` overrides and writes its outputs under the output directory.
//! Every file starts with a comment naming the command, the SHA-256 of the
//! config text and the seed.

mod commands;
mod config;

use std::path::PathBuf;

pub use commands::{
    cmd_casecontrol, cmd_eval, cmd_represent_compare, cmd_simulate, cmd_train, compare_representations, load_inputs, ridge_models,
    CaseControlSettings, CompareSettings, Comparison, EvalSettings, Inputs, ModelInput, NetSettings, PredictorMode,
};
pub use config::RunConfig;

use crate::error::{Error, Result};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "READERVAR_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Eval,
    Train,
    RepresentCompare,
    CaseControl,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Eval => "eval",
            Command::Train => "train",
            Command::RepresentCompare => "represent-compare",
            Command::CaseControl => "casecontrol",
        }
    }

    /// Runs the command and returns the files it wrote.
    pub fn run(self, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
        match self {
            Command::Simulate => cmd_simulate(cfg),
            Command::Eval => cmd_eval(cfg),
            Command::Train => cmd_train(cfg),
            Command::RepresentCompare => cmd_represent_compare(cfg),
            Command::CaseControl => cmd_casecontrol(cfg),
        }
    }
}

/// Process exit status for an error: 2 for configuration problems, 3 for
/// diverged training, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        Error::Diverged { .. } => 3,
        _ => 1,
    }
}

/// Sizes the global thread pool from [`THREADS_ENV`] when set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}
