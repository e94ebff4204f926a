//! `play-e2e`: the full closed loop. Each move renders the true board to an
//! image, reads it back through segmentation and the digit classifier,
//! injects recognition errors at a configurable rate, and lets the Q-network
//! act on what was perceived. The chosen action maps to a precomputed swipe
//! trajectory; its board effect is applied by the simulator, and an illegal
//! swipe leaves the board unchanged, exactly like swiping a real device that
//! ignores the gesture. A clean simulator run under the same game streams is
//! the paired control, so the gap report isolates the perception channel.

use std::path::Path;

use anyhow::{Context, Result};
use swipe48_core::dqn::{
    evaluate, select_action, EvalPolicy, EvalStats, GameRow,
};
use swipe48_core::encoding::{encode_input, History};
use swipe48_core::exec::{map_indexed, ExecMode};
use swipe48_core::game::{Action, ActionSet, Board};
use swipe48_core::lqr::{optimize_all, IlqrOptions, SwipeConfig, SwipeDirection};
use swipe48_core::nn::Network;
use swipe48_core::rng::{domain, stream};
use swipe48_core::vision::{
    inject_misclassification, read_board, render_board, RenderStyle, VisionError,
};

use crate::config::Config;
use crate::manifest::write_manifest;
use crate::report::GapReport;
use crate::RunArgs;

struct LoopSettings {
    style: RenderStyle,
    error_rate: f64,
    max_moves: u32,
}

/// One closed-loop game on its own derived streams. The game stream is the
/// one the clean evaluation uses, so both runs share boards and spawns until
/// a perception error changes the action sequence.
fn play_one_e2e(
    qnet: &Network,
    digit_net: &Network,
    settings: &LoopSettings,
    master_seed: u64,
    game: usize,
) -> Result<(GameRow, [u64; 4]), VisionError> {
    let mut game_rng = stream(master_seed, domain::EVAL, game as u64);
    let mut render_rng = stream(master_seed, domain::RENDER, game as u64);
    let mut inject_rng = stream(master_seed, domain::INJECT, game as u64);

    let mut board = Board::new_game(&mut game_rng);
    let mut history = History::new();
    let mut row = GameRow {
        moves: 0,
        max_tile_exponent: board.max_tile(),
        moves_to_128: None,
        moves_to_256: None,
    };
    let all_actions: ActionSet = Action::ALL.into_iter().collect();
    // Swipes executed per direction, indexed by action code.
    let mut executed = [0u64; 4];

    loop {
        if board.legal_actions().is_empty() || (settings.max_moves > 0 && row.moves >= settings.max_moves)
        {
            return Ok((row, executed));
        }
        let image = render_board(&board, &settings.style, &mut render_rng);
        let seen = read_board(&image, digit_net)?;
        let perceived = inject_misclassification(&seen, settings.error_rate, &mut inject_rng);

        // Act on the perceived board. If perception claims the game is over,
        // fall back to the unmasked argmax; the device ignores illegal swipes,
        // so a wrong guess wastes a move instead of ending the game.
        let perceived_legal = perceived.legal_actions();
        let mask = if perceived_legal.is_empty() {
            all_actions
        } else {
            perceived_legal
        };
        let input = encode_input(&perceived, history.entries());
        let action = select_action(qnet, &input, mask, 0.0, &mut game_rng)
            .expect("mask is never empty");

        let t = board.step(action, &mut game_rng);
        executed[action.code() as usize] += 1;
        history.push(perceived, action);
        board = t.after_spawn;
        row.moves += 1;
        let max = board.max_tile();
        if max > row.max_tile_exponent {
            row.max_tile_exponent = max;
        }
        if max >= 7 && row.moves_to_128.is_none() {
            row.moves_to_128 = Some(row.moves);
        }
        if max >= 8 && row.moves_to_256.is_none() {
            row.moves_to_256 = Some(row.moves);
        }
        if t.terminal {
            return Ok((row, executed));
        }
    }
}

pub fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = Config::load(args.config.as_deref())?;
    let seed = cfg.seed(args.seed)?;
    let checkpoint = cfg.take_required("checkpoint")?;
    let digit_checkpoint = cfg.take_required("digit_checkpoint")?;
    let n_games = cfg.take_usize("n_games", 1_000)?;
    let error_rate = cfg.take_f64("error_rate", 0.011)?;
    let max_moves = cfg.take_u32("max_moves", 4_000)?;
    let style = super::digits::style_config(&mut cfg)?;
    let parallel = cfg.take_bool("parallel", true)?;
    cfg.finish()?;

    super::ensure_out_dir(&args.out)?;
    let qnet = super::eval_dqn::load_qnet(Path::new(&checkpoint))?;
    let digit_net = super::digits::load_digit_net(Path::new(&digit_checkpoint))?;
    let mode = ExecMode::resolve(parallel);

    // The four swipes the device actions map to; their residuals are the
    // control error of the loop.
    let trajectories = optimize_all(&SwipeConfig::default(), &IlqrOptions::default(), mode)?;

    let clean = evaluate(&EvalPolicy::Greedy(&qnet), n_games, seed, max_moves, mode)?;
    super::write_file(&super::out_path(&args.out, "games_clean.csv"), |w| {
        super::schema_header(w, "games")?;
        clean.write_csv(w)
    })?;

    let settings = LoopSettings {
        style,
        error_rate,
        max_moves,
    };
    let outcomes: Result<Vec<(GameRow, [u64; 4])>, VisionError> =
        map_indexed(mode, n_games, |g| {
            play_one_e2e(&qnet, &digit_net, &settings, seed, g)
        })
        .into_iter()
        .collect();
    let outcomes = outcomes.context("closed-loop game failed")?;
    let mut executed = [0u64; 4];
    let rows = outcomes
        .into_iter()
        .map(|(row, counts)| {
            for (total, n) in executed.iter_mut().zip(counts) {
                *total += n;
            }
            row
        })
        .collect();
    let injected = EvalStats::from_rows(rows);
    super::write_file(&super::out_path(&args.out, "games_injected.csv"), |w| {
        super::schema_header(w, "games")?;
        injected.write_csv(w)
    })?;

    super::write_file(&super::out_path(&args.out, "swipes.csv"), |w| {
        use std::io::Write;
        super::schema_header(w, "swipe-executions")?;
        writeln!(
            w,
            "direction,accepted_iterations,final_cost,max_waypoint_residual_rad,contact_first_step,contact_last_step,contact_steps,executed_swipes"
        )?;
        for traj in &trajectories {
            let count: u64 = Action::ALL
                .iter()
                .filter(|a| SwipeDirection::from(**a) == traj.direction)
                .map(|a| executed[a.code() as usize])
                .sum();
            writeln!(w, "{},{}", super::swipes::summary_line(traj), count)?;
        }
        Ok(())
    })?;

    let gap = GapReport::from_stats(&clean, &injected);
    super::write_file(&super::out_path(&args.out, "gap_report.csv"), |w| {
        super::schema_header(w, "gap-report")?;
        gap.write_csv(w)
    })?;
    write_manifest(&args.out, "play-e2e", cfg.echo())?;
    println!(
        "play-e2e: reach128 clean {:.2}% -> injected {:.2}% ({:+.2}pp), reach256 {:.2}% -> {:.2}% ({:+.2}pp), moves {:.1} -> {:.1} ({:+.2}%)",
        gap.reach128_clean_pct,
        gap.reach128_injected_pct,
        gap.reach128_diff_pp(),
        gap.reach256_clean_pct,
        gap.reach256_injected_pct,
        gap.reach256_diff_pp(),
        gap.mean_moves_clean,
        gap.mean_moves_injected,
        gap.moves_inflation_pct()
    );
    Ok(())
}
