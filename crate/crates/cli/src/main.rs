//! `aggforge`: generate graphs, partition them, sweep the blocked kernel,
//! train GraphSAGE and query the work/memory estimators.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 verification failure.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "aggforge", version, about = "Full-batch GNN aggregation engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic graph with features (and labels for SBM).
    Gen(commands::GenArgs),
    /// Partition an edge list and write the partition directory.
    Partition(commands::PartitionArgs),
    /// Sweep block sizes for the blocked aggregation kernel.
    Aggregate(commands::AggregateArgs),
    /// Train GraphSAGE on one process or a simulated cluster.
    Train(commands::TrainArgs),
    /// Evaluate the work or memory estimator.
    Estimate(commands::EstimateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Partition(a) => commands::partition(a),
        Command::Aggregate(a) => commands::aggregate(a),
        Command::Train(a) => commands::train(a),
        Command::Estimate(a) => commands::estimate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<commands::VerificationFailed>() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
