//! `optimize-swipes`: solve the four directional swipe trajectories and
//! export one per-step CSV each plus a summary table.

use anyhow::{ensure, Result};
use swipe48_core::exec::ExecMode;
use swipe48_core::lqr::{
    contact_points, optimize_all, write_csv, IlqrOptions, SwipeConfig, SwipeTrajectory,
};

use crate::config::Config;
use crate::manifest::write_manifest;
use crate::RunArgs;

/// Consume the swipe keys; waypoints pin at the quarter points of `steps`.
pub fn swipe_config(cfg: &mut Config) -> Result<SwipeConfig> {
    let defaults = SwipeConfig::default();
    let mut c = defaults;
    c.steps = cfg.take_usize("steps", defaults.steps)?;
    ensure!(c.steps >= 4, "steps must be at least 4");
    c.dt = cfg.take_f64("dt", defaults.dt)?;
    c.surface_z = cfg.take_f64("surface_z", defaults.surface_z)?;
    c.center.0 = cfg.take_f64("center_x", defaults.center.0)?;
    c.center.1 = cfg.take_f64("center_y", defaults.center.1)?;
    c.travel = cfg.take_f64("travel", defaults.travel)?;
    c.lift = cfg.take_f64("lift", defaults.lift)?;
    c.q_weight = cfg.take_f64("q_weight", defaults.q_weight)?;
    c.r_weight = cfg.take_f64("r_weight", defaults.r_weight)?;
    c.contact_tolerance = cfg.take_f64("contact_tolerance", defaults.contact_tolerance)?;
    c.ik_lambda = cfg.take_f64("ik_lambda", defaults.ik_lambda)?;
    c.ik_iterations = cfg.take_usize("ik_iterations", defaults.ik_iterations)?;
    c.waypoint_steps = [0, c.steps / 4, c.steps / 2, 3 * c.steps / 4, c.steps];
    Ok(c)
}

pub fn summary_line(traj: &SwipeTrajectory) -> String {
    let contacts = contact_points(traj);
    let max_residual = traj
        .waypoint_residuals
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    format!(
        "{},{},{:.6e},{:.6e},{},{},{}",
        traj.direction.name(),
        traj.accepted_costs.len().saturating_sub(1),
        traj.accepted_costs.last().copied().unwrap_or(f64::NAN),
        max_residual,
        contacts.first().map_or(-1, |&(t, _)| t as i64),
        contacts.last().map_or(-1, |&(t, _)| t as i64),
        contacts.len()
    )
}

pub fn run(args: &RunArgs) -> Result<()> {
    let mut cfg = Config::load(args.config.as_deref())?;
    let _seed = cfg.seed(args.seed)?;
    let swipe = swipe_config(&mut cfg)?;
    let parallel = cfg.take_bool("parallel", true)?;
    cfg.finish()?;

    super::ensure_out_dir(&args.out)?;
    let mode = ExecMode::resolve(parallel);
    let trajectories = optimize_all(&swipe, &IlqrOptions::default(), mode)?;

    for traj in &trajectories {
        let name = format!("swipe_{}.csv", traj.direction.name());
        super::write_file(&super::out_path(&args.out, &name), |w| {
            super::schema_header(w, "swipe-trajectory")?;
            write_csv(traj, &swipe, w)
        })?;
    }
    super::write_file(&super::out_path(&args.out, "summary.csv"), |w| {
        use std::io::Write;
        super::schema_header(w, "swipe-summary")?;
        writeln!(
            w,
            "direction,accepted_iterations,final_cost,max_waypoint_residual_rad,contact_first_step,contact_last_step,contact_steps"
        )?;
        for traj in &trajectories {
            writeln!(w, "{}", summary_line(traj))?;
        }
        Ok(())
    })?;
    write_manifest(&args.out, "optimize-swipes", cfg.echo())?;
    for traj in &trajectories {
        println!("optimize-swipes: {}", summary_line(traj));
    }
    Ok(())
}
