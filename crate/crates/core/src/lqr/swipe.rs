//! Waypoint construction and trajectory optimization for the four swipe
//! gestures: descend from home onto the device surface, drag 0.06 m in the
//! swipe direction, lift off.

use std::io;

use nalgebra::{DMatrix, DVector, Vector3};

use super::arm::{dls_ik, forward_kinematics, ArmDynamics, N_JOINTS};
use super::ilqr::{ilqr_optimize, IlqrOptions, TrackingCost};
use super::LqrError;
use crate::exec::{map_indexed, ExecMode};
use crate::game::Action;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SwipeDirection {
    Left,
    Right,
    Backward,
    Forward,
}

impl SwipeDirection {
    pub const ALL: [SwipeDirection; 4] = [
        SwipeDirection::Left,
        SwipeDirection::Right,
        SwipeDirection::Backward,
        SwipeDirection::Forward,
    ];

    /// Unit travel direction on the device surface. The device lies flat;
    /// x points away from the arm base, y to the arm's left.
    pub fn unit(self) -> Vector3<f64> {
        match self {
            SwipeDirection::Left => Vector3::new(0.0, 1.0, 0.0),
            SwipeDirection::Right => Vector3::new(0.0, -1.0, 0.0),
            SwipeDirection::Forward => Vector3::new(1.0, 0.0, 0.0),
            SwipeDirection::Backward => Vector3::new(-1.0, 0.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SwipeDirection::Left => "left",
            SwipeDirection::Right => "right",
            SwipeDirection::Backward => "backward",
            SwipeDirection::Forward => "forward",
        }
    }
}

/// Screen-coordinate mapping: swiping "up" pushes tiles away from the base.
impl From<Action> for SwipeDirection {
    fn from(action: Action) -> SwipeDirection {
        match action {
            Action::Up => SwipeDirection::Forward,
            Action::Down => SwipeDirection::Backward,
            Action::Left => SwipeDirection::Left,
            Action::Right => SwipeDirection::Right,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SwipeConfig {
    /// Control steps per trajectory (states are steps + 1).
    pub steps: usize,
    /// Seconds per step; 250 steps span three seconds.
    pub dt: f64,
    /// Device surface plane height.
    pub surface_z: f64,
    /// Device center on the surface (x, y).
    pub center: (f64, f64),
    /// Total swipe travel on the surface in meters.
    pub travel: f64,
    /// Lift-off height above the surface at the final waypoint.
    pub lift: f64,
    /// State-tracking weight (Q = weight * I).
    pub q_weight: f64,
    /// Control weight (R = weight * I).
    pub r_weight: f64,
    /// |ee_z - surface_z| below this counts as surface contact.
    pub contact_tolerance: f64,
    /// Steps at which the five waypoints are pinned.
    pub waypoint_steps: [usize; 5],
    pub ik_lambda: f64,
    pub ik_iterations: usize,
}

impl Default for SwipeConfig {
    fn default() -> SwipeConfig {
        SwipeConfig {
            steps: 250,
            dt: 0.012,
            surface_z: -0.1,
            center: (1.30, 0.0),
            travel: 0.06,
            lift: 0.05,
            q_weight: 1e6,
            r_weight: 1.0,
            contact_tolerance: 1e-3,
            waypoint_steps: [0, 62, 125, 187, 250],
            ik_lambda: 0.05,
            ik_iterations: 200,
        }
    }
}

/// Five Cartesian waypoints: home, touch-down, swipe mid, swipe end, lift-off.
#[derive(Clone, Debug)]
pub struct WaypointSpec {
    pub direction: SwipeDirection,
    pub points: [Vector3<f64>; 5],
    pub surface_z: f64,
}

pub fn waypoints(direction: SwipeDirection, config: &SwipeConfig) -> WaypointSpec {
    let home = forward_kinematics(&[0.0; N_JOINTS]);
    let d = direction.unit();
    let center = Vector3::new(config.center.0, config.center.1, config.surface_z);
    let half = config.travel / 2.0;
    let touch = center - d * half;
    let end = center + d * half;
    WaypointSpec {
        direction,
        points: [home, touch, center, end, end + Vector3::new(0.0, 0.0, config.lift)],
        surface_z: config.surface_z,
    }
}

/// Cartesian target at step `t`: piecewise-linear between waypoints.
pub fn path_point(spec: &WaypointSpec, config: &SwipeConfig, t: usize) -> Vector3<f64> {
    let steps = &config.waypoint_steps;
    let seg = match steps.iter().rposition(|&s| s <= t) {
        Some(k) if k < 4 => k,
        _ => 3,
    };
    let (s0, s1) = (steps[seg], steps[seg + 1]);
    let frac = (t.min(s1) - s0) as f64 / (s1 - s0) as f64;
    spec.points[seg] + (spec.points[seg + 1] - spec.points[seg]) * frac
}

/// Joint reference for every step: the Cartesian path tracked by chained
/// damped-least-squares IK, each solve seeded with the previous step's pose.
pub fn joint_references(
    spec: &WaypointSpec,
    config: &SwipeConfig,
) -> Result<Vec<DVector<f64>>, LqrError> {
    let mut refs = Vec::with_capacity(config.steps + 1);
    let mut seed = [0.0; N_JOINTS];
    for t in 0..=config.steps {
        let target = path_point(spec, config, t);
        let (q, residual) = dls_ik(&target, &seed, config.ik_lambda, config.ik_iterations);
        if residual > 1e-6 {
            return Err(LqrError::Unreachable { step: t, residual });
        }
        seed = q;
        refs.push(DVector::from_row_slice(&q));
    }
    Ok(refs)
}

#[derive(Clone, Debug)]
pub struct SwipeTrajectory {
    pub direction: SwipeDirection,
    /// 251 joint states.
    pub states: Vec<DVector<f64>>,
    /// 250 joint-delta controls.
    pub controls: Vec<DVector<f64>>,
    /// End-effector position per state.
    pub ee: Vec<Vector3<f64>>,
    /// Surface-contact flag per state.
    pub contact: Vec<bool>,
    /// Joint references the optimizer tracked.
    pub references: Vec<DVector<f64>>,
    /// Task cost of the initial trajectory and each accepted iterate.
    pub accepted_costs: Vec<f64>,
    /// Joint-space residual at each of the five waypoint steps.
    pub waypoint_residuals: [f64; 5],
}

fn to_angles(x: &DVector<f64>) -> [f64; N_JOINTS] {
    let mut q = [0.0; N_JOINTS];
    q.copy_from_slice(x.as_slice());
    q
}

pub fn optimize_swipe(
    direction: SwipeDirection,
    config: &SwipeConfig,
    options: &IlqrOptions,
) -> Result<SwipeTrajectory, LqrError> {
    let spec = waypoints(direction, config);
    let references = joint_references(&spec, config)?;
    let cost = TrackingCost {
        q: DMatrix::identity(N_JOINTS, N_JOINTS) * config.q_weight,
        r: DMatrix::identity(N_JOINTS, N_JOINTS) * config.r_weight,
        x_ref: references.clone(),
    };
    let x0 = references[0].clone();
    let us0 = vec![DVector::zeros(N_JOINTS); config.steps];
    let mut result = ilqr_optimize(&ArmDynamics, &cost, &x0, us0, options)?;
    // Store the saturated controls: the joint deltas the actuator realized.
    for u in &mut result.us {
        u.apply(|v| *v = v.clamp(-super::arm::MAX_STEP, super::arm::MAX_STEP));
    }

    let ee: Vec<Vector3<f64>> = result
        .xs
        .iter()
        .map(|x| forward_kinematics(&to_angles(x)))
        .collect();
    let contact: Vec<bool> = ee
        .iter()
        .map(|p| (p.z - config.surface_z).abs() <= config.contact_tolerance)
        .collect();
    let mut waypoint_residuals = [0.0; 5];
    for (k, &s) in config.waypoint_steps.iter().enumerate() {
        waypoint_residuals[k] = (&result.xs[s] - &references[s]).norm();
    }
    Ok(SwipeTrajectory {
        direction,
        states: result.xs,
        controls: result.us,
        ee,
        contact,
        references,
        accepted_costs: result.accepted_costs,
        waypoint_residuals,
    })
}

/// Optimize all four directions; each direction is independent, so the work
/// fans out under the parallel mode.
pub fn optimize_all(
    config: &SwipeConfig,
    options: &IlqrOptions,
    mode: ExecMode,
) -> Result<Vec<SwipeTrajectory>, LqrError> {
    map_indexed(mode, SwipeDirection::ALL.len(), |i| {
        optimize_swipe(SwipeDirection::ALL[i], config, options)
    })
    .into_iter()
    .collect()
}

/// Steps whose end-effector lies on the surface, with positions.
pub fn contact_points(traj: &SwipeTrajectory) -> Vec<(usize, Vector3<f64>)> {
    traj.contact
        .iter()
        .enumerate()
        .filter(|&(_, &c)| c)
        .map(|(t, _)| (t, traj.ee[t]))
        .collect()
}

/// True when the contact flags form one unbroken run.
pub fn contact_is_contiguous(traj: &SwipeTrajectory) -> bool {
    let runs = traj
        .contact
        .windows(2)
        .filter(|w| w[0] != w[1])
        .count();
    runs <= 2
}

/// Per-step CSV: time, joint angles, controls, end-effector, contact flag.
/// The final state row has no control and leaves those fields empty.
pub fn write_csv<W: io::Write>(
    traj: &SwipeTrajectory,
    config: &SwipeConfig,
    mut w: W,
) -> io::Result<()> {
    write!(w, "t")?;
    for j in 0..N_JOINTS {
        write!(w, ",theta{j}")?;
    }
    for j in 0..N_JOINTS {
        write!(w, ",u{j}")?;
    }
    writeln!(w, ",ee_x,ee_y,ee_z,contact")?;
    for t in 0..traj.states.len() {
        write!(w, "{:.3}", t as f64 * config.dt)?;
        for j in 0..N_JOINTS {
            write!(w, ",{:.9}", traj.states[t][j])?;
        }
        for j in 0..N_JOINTS {
            if t < traj.controls.len() {
                write!(w, ",{:.9}", traj.controls[t][j])?;
            } else {
                write!(w, ",")?;
            }
        }
        writeln!(
            w,
            ",{:.9},{:.9},{:.9},{}",
            traj.ee[t].x,
            traj.ee[t].y,
            traj.ee[t].z,
            traj.contact[t] as u8
        )?;
    }
    Ok(())
}
