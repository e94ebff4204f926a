//! `train-dqn`: self-play Q-learning, saving the network checkpoint plus
//! per-episode and per-checkpoint CSV tables.

use anyhow::Result;
use swipe48_core::dqn::{train_with, DqnConfig, TrainEvent};
use swipe48_core::nn;

use crate::config::Config;
use crate::manifest::write_manifest;
use crate::RunArgs;

/// Consume every training key, defaulting to the full-scale run.
fn dqn_config(cfg: &mut Config) -> Result<DqnConfig> {
    let defaults = DqnConfig::default();
    let mut c = defaults.clone();
    c.gamma = cfg.take_f64("gamma", defaults.gamma)?;
    c.batch_size = cfg.take_usize("batch_size", defaults.batch_size)?;
    c.target_update_period =
        cfg.take_u64("target_update_period", defaults.target_update_period)?;
    c.learning_rate = cfg.take_f32("learning_rate", defaults.learning_rate)?;
    let clip = cfg.take_f64("grad_clip", defaults.grad_clip.unwrap_or(0.0))?;
    c.grad_clip = (clip > 0.0).then_some(clip);
    c.weights.monotonicity = cfg.take_f64("weight_monotonicity", defaults.weights.monotonicity)?;
    c.weights.smoothness = cfg.take_f64("weight_smoothness", defaults.weights.smoothness)?;
    c.weights.free_tiles = cfg.take_f64("weight_free_tiles", defaults.weights.free_tiles)?;
    c.weights.max_value = cfg.take_f64("weight_max_value", defaults.weights.max_value)?;
    c.win_bonus = cfg.take_f64("win_bonus", defaults.win_bonus)?;
    c.loss_penalty = cfg.take_f64("loss_penalty", defaults.loss_penalty)?;
    c.step_penalty = cfg.take_f64("step_penalty", defaults.step_penalty)?;
    c.goal_exponent = cfg.take_u8("goal_exponent", defaults.goal_exponent)?;
    c.train_steps = cfg.take_u64("train_steps", defaults.train_steps)?;
    c.eval_checkpoint_every =
        cfg.take_u64("eval_checkpoint_every", defaults.eval_checkpoint_every)?;
    c.eval_checkpoint_games =
        cfg.take_usize("eval_checkpoint_games", defaults.eval_checkpoint_games)?;
    c.epsilon.start = cfg.take_f64("epsilon_start", defaults.epsilon.start)?;
    c.epsilon.end = cfg.take_f64("epsilon_end", defaults.epsilon.end)?;
    c.epsilon.age_period = cfg.take_u64("epsilon_age_period", defaults.epsilon.age_period)?;
    c.epsilon.step = cfg.take_f64("epsilon_step", defaults.epsilon.step)?;
    Ok(c)
}

pub fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = Config::load(args.config.as_deref())?;
    let seed = cfg.seed(args.seed)?;
    let dqn = dqn_config(&mut cfg)?;
    cfg.finish()?;

    super::ensure_out_dir(&args.out)?;
    let (net, stats) = train_with(&dqn, seed, |event| match event {
        TrainEvent::Checkpoint(c) => println!(
            "checkpoint step={} reach128={:.1}% reach256={:.1}% mean_moves={:.1}",
            c.train_steps,
            100.0 * c.reach_128,
            100.0 * c.reach_256,
            c.mean_moves
        ),
        TrainEvent::Episode(e) => {
            if e.episode % 500 == 0 {
                println!(
                    "episode {} moves={} max_tile=2^{} loss={:.4}",
                    e.episode, e.moves, e.max_tile_exponent, e.mean_loss
                );
            }
        }
    })?;

    nn::save(&net, &super::out_path(&args.out, "qnet.nnv1"))?;
    super::write_file(&super::out_path(&args.out, "episodes.csv"), |w| {
        super::schema_header(w, "episodes")?;
        stats.write_csv(w)
    })?;
    super::write_file(&super::out_path(&args.out, "checkpoints.csv"), |w| {
        super::schema_header(w, "checkpoints")?;
        stats.write_checkpoints_csv(w)
    })?;
    write_manifest(&args.out, "train-dqn", cfg.echo())?;
    println!(
        "train-dqn: {} steps over {} episodes, checkpoint saved to {}",
        stats.train_steps,
        stats.episodes.len(),
        super::out_path(&args.out, "qnet.nnv1").display()
    );
    Ok(())
}
