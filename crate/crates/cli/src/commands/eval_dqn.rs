//! `eval-dqn`: greedy rollouts of a saved Q-network on the simulator.

use std::path::Path;

use anyhow::{ensure, Result};
use swipe48_core::dqn::{evaluate, EvalPolicy, QNET_SIZES};
use swipe48_core::exec::ExecMode;
use swipe48_core::nn::{self, Network};

use crate::config::Config;
use crate::manifest::write_manifest;
use crate::RunArgs;

pub fn load_qnet(path: &Path) -> Result<Network> {
    let net = nn::load(path)?;
    ensure!(
        net.in_dim() == QNET_SIZES[0] && net.out_dim() == *QNET_SIZES.last().unwrap(),
        "checkpoint {} is {}x{}, expected a {}-in {}-out Q-network",
        path.display(),
        net.in_dim(),
        net.out_dim(),
        QNET_SIZES[0],
        QNET_SIZES.last().unwrap()
    );
    Ok(net)
}

pub fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = Config::load(args.config.as_deref())?;
    let seed = cfg.seed(args.seed)?;
    let checkpoint = cfg.take_required("checkpoint")?;
    let n_games = cfg.take_usize("n_games", 1_000)?;
    let max_moves = cfg.take_u32("max_moves", 0)?;
    let parallel = cfg.take_bool("parallel", true)?;
    cfg.finish()?;

    super::ensure_out_dir(&args.out)?;
    let net = load_qnet(Path::new(&checkpoint))?;
    let mode = ExecMode::resolve(parallel);
    let stats = evaluate(&EvalPolicy::Greedy(&net), n_games, seed, max_moves, mode)?;
    super::write_file(&super::out_path(&args.out, "games.csv"), |w| {
        super::schema_header(w, "games")?;
        stats.write_csv(w)
    })?;
    write_manifest(&args.out, "eval-dqn", cfg.echo())?;
    println!(
        "eval-dqn: games={} reach128={:.2}% reach256={:.2}% mean_moves={:.1}",
        n_games,
        stats.reach_rate(7) * 100.0,
        stats.reach_rate(8) * 100.0,
        stats.mean_moves()
    );
    Ok(())
}
