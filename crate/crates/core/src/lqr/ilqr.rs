//! Iterative LQR with a blended trust cost.
//!
//! Each outer iteration linearizes the dynamics about the incumbent
//! trajectory and solves a tracking LQR whose cost blends the task cost with
//! a quadratic pull toward the incumbent, l = (1-alpha) l_task + alpha
//! (|x - x_i|^2 + |u - u_i|^2). The very first solve has no incumbent worth
//! trusting (the initial controls are a guess), so it optimizes the pure task
//! cost; on linear dynamics that lands on the LQR optimum in one iteration.

use nalgebra::{DMatrix, DVector};

use super::riccati::{solve_tracking, TrackingProblem};
use super::LqrError;

/// Discrete-time dynamics x_{t+1} = f(x_t, u_t).
pub trait Dynamics {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64>;
}

/// Quadratic waypoint-tracking task: sum over t of
/// (x_t - xref_t)'Q(x_t - xref_t) + u_t'R u_t, with the same Q terminally.
#[derive(Clone, Debug)]
pub struct TrackingCost {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Reference states for t = 0..=N.
    pub x_ref: Vec<DVector<f64>>,
}

impl TrackingCost {
    pub fn horizon(&self) -> usize {
        self.x_ref.len() - 1
    }

    pub fn task_cost(&self, xs: &[DVector<f64>], us: &[DVector<f64>]) -> f64 {
        let mut total = 0.0;
        for t in 0..self.horizon() {
            let dx = &xs[t] - &self.x_ref[t];
            total += (dx.transpose() * &self.q * &dx)[(0, 0)];
            total += (us[t].transpose() * &self.r * &us[t])[(0, 0)];
        }
        let dx = &xs[self.horizon()] - &self.x_ref[self.horizon()];
        total + (dx.transpose() * &self.q * &dx)[(0, 0)]
    }
}

/// Trust-weight schedule and stopping rules.
#[derive(Clone, Copy, Debug)]
pub struct IlqrOptions {
    pub max_iterations: usize,
    /// Trust weight for the first blended solve.
    pub alpha0: f64,
    /// Multiplier on acceptance (toward pure task cost).
    pub accept_factor: f64,
    /// Multiplier on rejection (toward the incumbent).
    pub reject_factor: f64,
    pub alpha_cap: f64,
    /// Stop when relative task-cost improvement falls below this.
    pub tolerance: f64,
    /// Give up after this many consecutive rejections.
    pub max_consecutive_rejects: usize,
    /// Finite-difference step for linearization.
    pub fd_step: f64,
}

impl Default for IlqrOptions {
    fn default() -> IlqrOptions {
        IlqrOptions {
            max_iterations: 50,
            alpha0: 0.9,
            accept_factor: 0.7,
            reject_factor: 1.2,
            alpha_cap: 0.999,
            tolerance: 1e-10,
            max_consecutive_rejects: 12,
            fd_step: 1e-5,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IlqrResult {
    pub xs: Vec<DVector<f64>>,
    pub us: Vec<DVector<f64>>,
    /// Task cost of the initial trajectory followed by each accepted iterate.
    pub accepted_costs: Vec<f64>,
    pub iterations: usize,
    pub rejections: usize,
}

/// Central-difference Jacobians of the step map at each (x_t, u_t).
pub fn linearize<D: Dynamics>(
    dynamics: &D,
    xs: &[DVector<f64>],
    us: &[DVector<f64>],
    h: f64,
) -> Vec<(DMatrix<f64>, DMatrix<f64>)> {
    let n = dynamics.state_dim();
    let m = dynamics.control_dim();
    us.iter()
        .enumerate()
        .map(|(t, u)| {
            let x = &xs[t];
            let mut a = DMatrix::zeros(n, n);
            for j in 0..n {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let d = (dynamics.step(&xp, u) - dynamics.step(&xm, u)) / (2.0 * h);
                a.set_column(j, &d);
            }
            let mut b = DMatrix::zeros(n, m);
            for j in 0..m {
                let mut up = u.clone();
                let mut um = u.clone();
                up[j] += h;
                um[j] -= h;
                let d = (dynamics.step(x, &up) - dynamics.step(x, &um)) / (2.0 * h);
                b.set_column(j, &d);
            }
            (a, b)
        })
        .collect()
}

fn rollout_nonlinear<D: Dynamics>(
    dynamics: &D,
    x0: &DVector<f64>,
    us: &[DVector<f64>],
) -> Vec<DVector<f64>> {
    let mut xs = Vec::with_capacity(us.len() + 1);
    xs.push(x0.clone());
    for u in us {
        let next = dynamics.step(xs.last().unwrap(), u);
        xs.push(next);
    }
    xs
}

type Trajectory = (Vec<DVector<f64>>, Vec<DVector<f64>>);

/// One blended subproblem in deviation coordinates about (xs, us), solved
/// exactly, then rolled forward through the true dynamics.
fn blended_step<D: Dynamics>(
    dynamics: &D,
    cost: &TrackingCost,
    xs: &[DVector<f64>],
    us: &[DVector<f64>],
    alpha: f64,
    h: f64,
) -> Result<Trajectory, LqrError> {
    let n = dynamics.state_dim();
    let m = dynamics.control_dim();
    let n_steps = us.len();
    let jac = linearize(dynamics, xs, us, h);

    // In deviation coordinates the incumbent sits at zero, so the trust term
    // is a plain alpha |dx|^2 + alpha |du|^2. Completing the square over
    // Qb = (1-a)Q + aI merges the task pull (toward xref - x) and the trust
    // pull (toward zero) into one reference: Qb^-1 (1-a) Q (xref_t - x_t).
    let (q_blend, r_blend, x_ref, u_ref) = if alpha == 0.0 {
        // Pure task cost; no inversion, so a merely PSD Q is fine.
        let x_ref = (0..=n_steps).map(|t| &cost.x_ref[t] - &xs[t]).collect();
        let u_ref = us.iter().map(|u| -u).collect();
        (cost.q.clone(), cost.r.clone(), x_ref, u_ref)
    } else {
        let q_blend = &cost.q * (1.0 - alpha) + DMatrix::identity(n, n) * alpha;
        let r_blend = &cost.r * (1.0 - alpha) + DMatrix::identity(m, m) * alpha;
        let q_chol = q_blend.clone().cholesky().ok_or(LqrError::IllPosed)?;
        let r_chol = r_blend.clone().cholesky().ok_or(LqrError::IllPosed)?;
        let x_ref = (0..=n_steps)
            .map(|t| q_chol.solve(&((&cost.q * (&cost.x_ref[t] - &xs[t])) * (1.0 - alpha))))
            .collect();
        let u_ref = us
            .iter()
            .map(|u| r_chol.solve(&((&cost.r * u) * -(1.0 - alpha))))
            .collect();
        (q_blend, r_blend, x_ref, u_ref)
    };

    let problem = TrackingProblem {
        a: jac.iter().map(|(a, _)| a.clone()).collect(),
        b: jac.iter().map(|(_, b)| b.clone()).collect(),
        q: q_blend,
        r: r_blend,
        x_ref,
        u_ref,
    };
    let policy = solve_tracking(&problem)?;

    // Forward pass through the true dynamics with the deviation policy.
    let mut new_xs = Vec::with_capacity(n_steps + 1);
    let mut new_us = Vec::with_capacity(n_steps);
    new_xs.push(xs[0].clone());
    for t in 0..n_steps {
        let dx = &new_xs[t] - &xs[t];
        let du = &policy.k[t] - &policy.f[t] * &dx;
        let u = &us[t] + du;
        let next = dynamics.step(&new_xs[t], &u);
        new_us.push(u);
        new_xs.push(next);
    }
    Ok((new_xs, new_us))
}

/// Minimize the task cost by repeated linearize-solve-rollout, accepting only
/// iterates that do not increase it. `us_init` seeds the incumbent.
pub fn ilqr_optimize<D: Dynamics>(
    dynamics: &D,
    cost: &TrackingCost,
    x0: &DVector<f64>,
    us_init: Vec<DVector<f64>>,
    options: &IlqrOptions,
) -> Result<IlqrResult, LqrError> {
    if cost.x_ref.len() != us_init.len() + 1 {
        return Err(LqrError::Dimension(format!(
            "{} reference states for {} controls",
            cost.x_ref.len(),
            us_init.len()
        )));
    }
    let mut us = us_init;
    let mut xs = rollout_nonlinear(dynamics, x0, &us);
    let mut best = cost.task_cost(&xs, &us);
    if !best.is_finite() {
        return Err(LqrError::Diverged);
    }
    let mut accepted_costs = vec![best];
    // First solve trusts nothing; alpha engages once an optimized incumbent
    // exists, then anneals toward the pure task cost on each acceptance.
    let mut alpha: Option<f64> = None;
    let mut iterations = 0;
    let mut rejections = 0;
    let mut consecutive_rejects = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let a = alpha.unwrap_or(0.0);
        let (new_xs, new_us) = blended_step(dynamics, cost, &xs, &us, a, options.fd_step)?;
        let new_cost = cost.task_cost(&new_xs, &new_us);
        if !new_cost.is_finite() {
            return Err(LqrError::Diverged);
        }
        if new_cost <= best {
            let improvement = best - new_cost;
            xs = new_xs;
            us = new_us;
            best = new_cost;
            accepted_costs.push(best);
            alpha = Some(match alpha {
                None => options.alpha0,
                Some(a) => a * options.accept_factor,
            });
            consecutive_rejects = 0;
            if improvement <= options.tolerance * best.max(1e-12) {
                break;
            }
        } else {
            rejections += 1;
            consecutive_rejects += 1;
            alpha = Some(match alpha {
                None => options.alpha0,
                Some(a) => (a * options.reject_factor).min(options.alpha_cap),
            });
            if consecutive_rejects >= options.max_consecutive_rejects {
                break;
            }
        }
    }

    Ok(IlqrResult {
        xs,
        us,
        accepted_costs,
        iterations,
        rejections,
    })
}
