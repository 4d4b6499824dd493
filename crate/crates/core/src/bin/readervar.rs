use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use readervar::harness::{exit_code, init_threads, Command, RunConfig};

#[derive(Parser)]
#[command(name = "readervar", version, about = "Reader variability experiments on density scores")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a multi-reader cohort and its case-control roster
    Simulate(Args),
    /// Ridge label matrix, subset runs and size curve
    Eval(Args),
    /// Train a single- or multi-predictor network
    Train(Args),
    /// Compare untrained, single- and multi-predictor representations
    RepresentCompare(Args),
    /// Top versus bottom quintile odds ratios
    Casecontrol(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Eval(a) => (Command::Eval, a),
        Cmd::Train(a) => (Command::Train, a),
        Cmd::RepresentCompare(a) => (Command::RepresentCompare, a),
        Cmd::Casecontrol(a) => (Command::CaseControl, a),
    };
    let result = init_threads()
        .and_then(|_| RunConfig::load(&args.config, args.seed, args.out))
        .and_then(|cfg| cmd.run(&cfg));
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("readervar {}: {e}", cmd.name());
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
