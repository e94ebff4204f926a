//! `swipe48`: command-line harness over the 2048 playing stack. Every
//! subcommand reads a flat key=value config file, derives all randomness from
//! one master seed, and writes its outputs plus a rerunnable manifest into an
//! output directory.

mod commands;
mod config;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "swipe48", version, about = "2048 self-play, vision, and swipe-control harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config file's `seed` key.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for CSVs, checkpoints, and the run manifest.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train the Q-network by self-play and save its checkpoint.
    TrainDqn(RunArgs),
    /// Play a saved Q-network greedily against the simulator.
    EvalDqn(RunArgs),
    /// Play uniformly random games as the reference baseline.
    BaselineRandom(RunArgs),
    /// Closed loop: render the board, read it back through the classifier,
    /// inject recognition errors, and act on what was perceived.
    PlayE2e(RunArgs),
    /// Optimize the four swipe trajectories and export them as CSV.
    OptimizeSwipes(RunArgs),
    /// Build the rendered tile dataset and train the digit classifier.
    TrainDigits(RunArgs),
    /// Evaluate a saved digit classifier on a rebuilt held-out split.
    EvalDigits(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::TrainDqn(args) => commands::train_dqn::run(args),
        Command::EvalDqn(args) => commands::eval_dqn::run(args),
        Command::BaselineRandom(args) => commands::baseline::run(args),
        Command::PlayE2e(args) => commands::play_e2e::run(args),
        Command::OptimizeSwipes(args) => commands::swipes::run(args),
        Command::TrainDigits(args) => commands::digits::run_train(args),
        Command::EvalDigits(args) => commands::digits::run_eval(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
