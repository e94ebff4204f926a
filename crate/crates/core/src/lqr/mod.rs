//! Trajectory optimization for the swipe arm: finite-horizon LQR via the
//! Riccati recursion, reference tracking with an affine value function,
//! iterative linearization for nonlinear dynamics, and the seven-joint arm
//! model with its four swipe trajectories.

mod arm;
mod ilqr;
mod riccati;
mod swipe;

pub use arm::{
    dls_ik, forward_kinematics, jacobian, total_reach, ArmDynamics, JOINT_LIMIT, LINK_LENGTHS,
    MAX_STEP, N_JOINTS,
};
pub use ilqr::{ilqr_optimize, linearize, Dynamics, IlqrOptions, IlqrResult, TrackingCost};
pub use riccati::{
    rollout, rollout_tracking, solve_lqr, solve_tracking, trajectory_cost, AffinePolicy,
    LqrProblem, RiccatiSolution, TrackingProblem,
};
pub use swipe::{
    contact_is_contiguous, contact_points, joint_references, optimize_all, optimize_swipe,
    path_point, waypoints, write_csv, SwipeConfig, SwipeDirection, SwipeTrajectory, WaypointSpec,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LqrError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("state cost Q must be symmetric positive semidefinite")]
    NotPsd,
    #[error("control cost R must be symmetric positive definite")]
    NotPd,
    #[error("ill-posed problem: R + B'PB is not positive definite")]
    IllPosed,
    #[error("optimization diverged to a non-finite cost")]
    Diverged,
    #[error("swipe path unreachable at step {step}: ik residual {residual:.3e} m")]
    Unreachable { step: usize, residual: f64 },
}
