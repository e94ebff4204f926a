//! `baseline-random`: uniformly random play over the legal actions, the
//! reference point every learned policy is compared against.

use anyhow::Result;
use swipe48_core::dqn::{evaluate, EvalPolicy};
use swipe48_core::exec::ExecMode;

use crate::config::Config;
use crate::manifest::write_manifest;
use crate::RunArgs;

pub fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = Config::load(args.config.as_deref())?;
    let seed = cfg.seed(args.seed)?;
    let n_games = cfg.take_usize("n_games", 10_000)?;
    let max_moves = cfg.take_u32("max_moves", 0)?;
    let parallel = cfg.take_bool("parallel", true)?;
    cfg.finish()?;

    super::ensure_out_dir(&args.out)?;
    let mode = ExecMode::resolve(parallel);
    let stats = evaluate(&EvalPolicy::Random, n_games, seed, max_moves, mode)?;
    super::write_file(&super::out_path(&args.out, "games.csv"), |w| {
        super::schema_header(w, "games")?;
        stats.write_csv(w)
    })?;
    write_manifest(&args.out, "baseline-random", cfg.echo())?;
    println!(
        "baseline-random: games={} reach128={:.2}% reach256={:.2}% mean_moves={:.1}",
        n_games,
        stats.reach_rate(7) * 100.0,
        stats.reach_rate(8) * 100.0,
        stats.mean_moves()
    );
    Ok(())
}
