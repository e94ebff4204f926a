//! Self-play training loop: ε-greedy episodes feed the replay buffer, one
//! minibatch update per move once the buffer can fill a batch.

use crate::encoding::{encode_input, History};
use crate::exec::ExecMode;
use crate::game::Board;
use crate::nn::{init_network, Network};
use crate::rng::{domain, stream, stream_seed};

use super::stats::{CheckpointRow, EpisodeRow, TrainingStats};
use super::{
    epsilon_at, evaluate, shaped_reward, AgentError, DqnAgent, DqnConfig, EvalPolicy, Experience,
    QNET_SIZES,
};

/// Progress callback payloads emitted by [`train_with`].
#[derive(Clone, Copy, Debug)]
pub enum TrainEvent<'a> {
    Episode(&'a EpisodeRow),
    Checkpoint(&'a CheckpointRow),
}

/// Train a fresh Q-network for `config.train_steps` minibatch updates.
/// All randomness derives from `master_seed`, so a rerun reproduces the run
/// bit for bit.
pub fn train(config: &DqnConfig, master_seed: u64) -> Result<(Network, TrainingStats), AgentError> {
    train_with(config, master_seed, |_| {})
}

pub fn train_with(
    config: &DqnConfig,
    master_seed: u64,
    mut on_event: impl FnMut(TrainEvent<'_>),
) -> Result<(Network, TrainingStats), AgentError> {
    config.validate()?;
    let net = init_network(&QNET_SIZES, stream_seed(master_seed, domain::NET_INIT, 0))
        .expect("fixed layer sizes are valid");
    let mut agent = DqnAgent::new(net, config.clone())?;
    let mut rng = stream(master_seed, domain::TRAIN, 0);

    let mut stats = TrainingStats {
        train_steps: config.train_steps,
        ..TrainingStats::default()
    };
    let mut board = Board::new_game(&mut rng);
    let mut history = History::new();
    let mut episode: u64 = 0;
    let mut moves: u32 = 0;
    let mut loss_sum = 0.0f64;
    let mut loss_n: u64 = 0;

    while agent.train_steps_done() < config.train_steps {
        let legal = board.legal_actions();
        debug_assert!(!legal.is_empty(), "episodes reset on terminal boards");
        let eps = epsilon_at(agent.train_steps_done(), &config.epsilon);
        let input = encode_input(&board, history.entries());
        let action = agent.select(&input, legal, eps, &mut rng)?;
        let t = board.step(action, &mut rng);
        let reward = shaped_reward(&t, config);
        history.push(board, action);
        let next_input = encode_input(&t.after_spawn, history.entries());
        agent.replay_mut().push(Experience {
            input,
            action,
            reward: reward as f32,
            next_input,
            terminal: t.terminal,
        });
        moves += 1;

        if agent.replay().len() >= config.batch_size {
            loss_sum += agent.train_step(&mut rng)?;
            loss_n += 1;
            let done = agent.train_steps_done();
            if config.eval_checkpoint_every > 0
                && config.eval_checkpoint_games > 0
                && done % config.eval_checkpoint_every == 0
            {
                let seed = stream_seed(master_seed, domain::EVAL, done);
                let eval = evaluate(
                    &EvalPolicy::Greedy(agent.online()),
                    config.eval_checkpoint_games,
                    seed,
                    0,
                    ExecMode::resolve(true),
                )?;
                let row = CheckpointRow {
                    train_steps: done,
                    games: config.eval_checkpoint_games,
                    reach_128: eval.reach_rate(7),
                    reach_256: eval.reach_rate(8),
                    mean_moves: eval.mean_moves(),
                };
                on_event(TrainEvent::Checkpoint(&row));
                stats.checkpoints.push(row);
            }
        }

        board = t.after_spawn;
        if t.terminal {
            let row = EpisodeRow {
                episode,
                moves,
                max_tile_exponent: board.max_tile(),
                reached_128: board.max_tile() >= 7,
                reached_256: board.max_tile() >= 8,
                mean_loss: if loss_n > 0 {
                    loss_sum / loss_n as f64
                } else {
                    0.0
                },
            };
            on_event(TrainEvent::Episode(&row));
            stats.episodes.push(row);
            episode += 1;
            moves = 0;
            loss_sum = 0.0;
            loss_n = 0;
            board = Board::new_game(&mut rng);
            history.clear();
        }
    }

    Ok((agent.into_network(), stats))
}
