//! Finite-horizon discrete LQR via backward Riccati recursion, plus the
//! affine tracking variant the swipe optimizer builds on.

use nalgebra::{DMatrix, DVector};

use super::LqrError;

/// Time-varying linear dynamics with constant quadratic costs over a fixed
/// horizon. Cost: sum over t < N of x'Qx + u'Ru, plus terminal x_N'Qx_N.
#[derive(Clone, Debug)]
pub struct LqrProblem {
    a: Vec<DMatrix<f64>>,
    b: Vec<DMatrix<f64>>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    horizon: usize,
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<(), LqrError> {
    let scale = m.amax().max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-9 * scale {
                return Err(LqrError::Dimension(format!("{what} is not symmetric")));
            }
        }
    }
    Ok(())
}

fn check_psd(q: &DMatrix<f64>) -> Result<(), LqrError> {
    check_symmetric(q, "Q").map_err(|_| LqrError::NotPsd)?;
    let eig = q.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    if eig.eigenvalues.iter().any(|&l| l < -1e-9 * scale) {
        return Err(LqrError::NotPsd);
    }
    Ok(())
}

fn check_pd(r: &DMatrix<f64>) -> Result<(), LqrError> {
    check_symmetric(r, "R").map_err(|_| LqrError::NotPd)?;
    if r.clone().cholesky().is_none() {
        return Err(LqrError::NotPd);
    }
    Ok(())
}

impl LqrProblem {
    /// Constant A and B over `horizon` steps.
    pub fn time_invariant(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        horizon: usize,
    ) -> Result<LqrProblem, LqrError> {
        LqrProblem::time_varying(vec![a; horizon.max(1)], vec![b; horizon.max(1)], q, r)
    }

    /// Per-step A_t and B_t; the horizon is their common length.
    pub fn time_varying(
        a: Vec<DMatrix<f64>>,
        b: Vec<DMatrix<f64>>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
    ) -> Result<LqrProblem, LqrError> {
        if a.is_empty() || a.len() != b.len() {
            return Err(LqrError::Dimension(format!(
                "need matching nonempty A ({}) and B ({}) sequences",
                a.len(),
                b.len()
            )));
        }
        let n = a[0].nrows();
        let m = b[0].ncols();
        for (t, (at, bt)) in a.iter().zip(&b).enumerate() {
            if at.nrows() != n || at.ncols() != n {
                return Err(LqrError::Dimension(format!("A_{t} is not {n}x{n}")));
            }
            if bt.nrows() != n || bt.ncols() != m {
                return Err(LqrError::Dimension(format!("B_{t} is not {n}x{m}")));
            }
        }
        if q.nrows() != n || q.ncols() != n {
            return Err(LqrError::Dimension(format!("Q is not {n}x{n}")));
        }
        if r.nrows() != m || r.ncols() != m {
            return Err(LqrError::Dimension(format!("R is not {m}x{m}")));
        }
        check_psd(&q)?;
        check_pd(&r)?;
        let horizon = a.len();
        Ok(LqrProblem { a, b, q, r, horizon })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn state_dim(&self) -> usize {
        self.a[0].nrows()
    }

    pub fn control_dim(&self) -> usize {
        self.b[0].ncols()
    }

    pub fn a_at(&self, t: usize) -> &DMatrix<f64> {
        &self.a[t]
    }

    pub fn b_at(&self, t: usize) -> &DMatrix<f64> {
        &self.b[t]
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }
}

/// Cost-to-go matrices P_0..P_N and feedback gains F_0..F_{N-1} for the
/// policy u_t = -F_t x_t.
#[derive(Clone, Debug)]
pub struct RiccatiSolution {
    p: Vec<DMatrix<f64>>,
    f: Vec<DMatrix<f64>>,
}

impl RiccatiSolution {
    pub fn p_at(&self, t: usize) -> &DMatrix<f64> {
        &self.p[t]
    }

    pub fn f_at(&self, t: usize) -> &DMatrix<f64> {
        &self.f[t]
    }

    pub fn gains(&self) -> &[DMatrix<f64>] {
        &self.f
    }

    pub fn cost_to_go(&self) -> &[DMatrix<f64>] {
        &self.p
    }
}

/// P_N = Q; backwards: F_t = (R + B'P_{t+1}B)^-1 B'P_{t+1}A and
/// P_t = A'P_{t+1}A - (A'P_{t+1}B) F_t + Q.
pub fn solve_lqr(problem: &LqrProblem) -> Result<RiccatiSolution, LqrError> {
    let n_steps = problem.horizon;
    let mut p = vec![DMatrix::zeros(0, 0); n_steps + 1];
    let mut f = vec![DMatrix::zeros(0, 0); n_steps];
    p[n_steps] = problem.q.clone();
    for t in (0..n_steps).rev() {
        let (a, b) = (&problem.a[t], &problem.b[t]);
        let p_next = &p[t + 1];
        let bt_p = b.transpose() * p_next;
        let m = &problem.r + &bt_p * b;
        let chol = m.cholesky().ok_or(LqrError::IllPosed)?;
        let ft = chol.solve(&(&bt_p * a));
        let at_p_b = a.transpose() * p_next * b;
        p[t] = a.transpose() * p_next * a - at_p_b * &ft + &problem.q;
        f[t] = ft;
    }
    Ok(RiccatiSolution { p, f })
}

/// Simulate the closed loop u_t = -F_t x_t from `x0`.
pub fn rollout(
    problem: &LqrProblem,
    solution: &RiccatiSolution,
    x0: &DVector<f64>,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let mut xs = Vec::with_capacity(problem.horizon + 1);
    let mut us = Vec::with_capacity(problem.horizon);
    xs.push(x0.clone());
    for t in 0..problem.horizon {
        let u = -(&solution.f[t] * &xs[t]);
        let x_next = &problem.a[t] * &xs[t] + &problem.b[t] * &u;
        us.push(u);
        xs.push(x_next);
    }
    (xs, us)
}

/// Sum over t < N of x'Qx + u'Ru plus the terminal x_N'Qx_N.
pub fn trajectory_cost(problem: &LqrProblem, xs: &[DVector<f64>], us: &[DVector<f64>]) -> f64 {
    let mut cost = 0.0;
    for t in 0..problem.horizon {
        cost += (xs[t].transpose() * &problem.q * &xs[t])[(0, 0)];
        cost += (us[t].transpose() * &problem.r * &us[t])[(0, 0)];
    }
    cost + (xs[problem.horizon].transpose() * &problem.q * &xs[problem.horizon])[(0, 0)]
}

/// Tracking variant: stage cost (x - xr_t)'Q(x - xr_t) + (u - ur_t)'R(u - ur_t)
/// with terminal (x_N - xr_N)'Q(x_N - xr_N), over time-varying dynamics.
#[derive(Clone, Debug)]
pub struct TrackingProblem {
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DMatrix<f64>>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub x_ref: Vec<DVector<f64>>,
    pub u_ref: Vec<DVector<f64>>,
}

/// Affine policy u_t = -F_t x_t + k_t.
#[derive(Clone, Debug)]
pub struct AffinePolicy {
    pub f: Vec<DMatrix<f64>>,
    pub k: Vec<DVector<f64>>,
}

impl TrackingProblem {
    pub fn horizon(&self) -> usize {
        self.a.len()
    }

    fn validate(&self) -> Result<(), LqrError> {
        let n_steps = self.a.len();
        if self.b.len() != n_steps
            || self.x_ref.len() != n_steps + 1
            || self.u_ref.len() != n_steps
        {
            return Err(LqrError::Dimension(format!(
                "tracking horizon mismatch: {} A, {} B, {} x_ref, {} u_ref",
                self.a.len(),
                self.b.len(),
                self.x_ref.len(),
                self.u_ref.len()
            )));
        }
        Ok(())
    }

    pub fn cost(&self, xs: &[DVector<f64>], us: &[DVector<f64>]) -> f64 {
        let mut total = 0.0;
        for t in 0..self.horizon() {
            let dx = &xs[t] - &self.x_ref[t];
            let du = &us[t] - &self.u_ref[t];
            total += (dx.transpose() * &self.q * &dx)[(0, 0)];
            total += (du.transpose() * &self.r * &du)[(0, 0)];
        }
        let dx = &xs[self.horizon()] - &self.x_ref[self.horizon()];
        total + (dx.transpose() * &self.q * &dx)[(0, 0)]
    }
}

/// Backward recursion over the value function V_t(x) = x'P_t x - 2 v_t'x + c:
/// the quadratic part matches the plain recursion and the affine part gives
/// k_t = M^-1 (R ur_t + B'v_{t+1}), v_t = Q xr_t + A'(v_{t+1} - P_{t+1} B k_t).
pub fn solve_tracking(problem: &TrackingProblem) -> Result<AffinePolicy, LqrError> {
    problem.validate()?;
    let n_steps = problem.horizon();
    let mut f = Vec::with_capacity(n_steps);
    let mut k = Vec::with_capacity(n_steps);
    let mut p_next = problem.q.clone();
    let mut v_next = &problem.q * &problem.x_ref[n_steps];
    for t in (0..n_steps).rev() {
        let (a, b) = (&problem.a[t], &problem.b[t]);
        let bt_p = b.transpose() * &p_next;
        let m = &problem.r + &bt_p * b;
        let chol = m.cholesky().ok_or(LqrError::IllPosed)?;
        let ft = chol.solve(&(&bt_p * a));
        let kt = chol.solve(&(&problem.r * &problem.u_ref[t] + b.transpose() * &v_next));
        let at_p_b = a.transpose() * &p_next * b;
        let p_t = a.transpose() * &p_next * a - &at_p_b * &ft + &problem.q;
        let v_t = &problem.q * &problem.x_ref[t] + a.transpose() * (&v_next - &p_next * b * &kt);
        p_next = p_t;
        v_next = v_t;
        f.push(ft);
        k.push(kt);
    }
    f.reverse();
    k.reverse();
    Ok(AffinePolicy { f, k })
}

/// Simulate u_t = -F_t x_t + k_t through the problem's linear dynamics.
pub fn rollout_tracking(
    problem: &TrackingProblem,
    policy: &AffinePolicy,
    x0: &DVector<f64>,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let mut xs = Vec::with_capacity(problem.horizon() + 1);
    let mut us = Vec::with_capacity(problem.horizon());
    xs.push(x0.clone());
    for t in 0..problem.horizon() {
        let u = &policy.k[t] - &policy.f[t] * &xs[t];
        let x_next = &problem.a[t] * &xs[t] + &problem.b[t] * &u;
        us.push(u);
        xs.push(x_next);
    }
    (xs, us)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    fn unit_problem(horizon: usize) -> LqrProblem {
        LqrProblem::time_invariant(scalar(1.0), scalar(1.0), scalar(1.0), scalar(1.0), horizon)
            .unwrap()
    }

    #[test]
    fn scalar_single_step_recursion() {
        let sol = solve_lqr(&unit_problem(1)).unwrap();
        assert_relative_eq!(sol.p_at(1)[(0, 0)], 1.0);
        assert_relative_eq!(sol.p_at(0)[(0, 0)], 1.5);
        assert_relative_eq!(sol.f_at(0)[(0, 0)], 0.5);
    }

    #[test]
    fn scalar_long_horizon_reaches_the_analytic_fixed_point() {
        // p = 1 + p - p^2/(1+p) has the positive root (1+sqrt(5))/2.
        let sol = solve_lqr(&unit_problem(200)).unwrap();
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sol.p_at(0)[(0, 0)] - golden).abs() < 1e-10);
    }

    #[test]
    fn zero_state_cost_means_zero_gains() {
        let p = LqrProblem::time_invariant(scalar(1.0), scalar(1.0), scalar(0.0), scalar(1.0), 5)
            .unwrap();
        let sol = solve_lqr(&p).unwrap();
        for t in 0..5 {
            assert_eq!(sol.f_at(t)[(0, 0)], 0.0);
            assert_eq!(sol.p_at(t)[(0, 0)], 0.0);
        }
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let bad_q = LqrProblem::time_invariant(scalar(1.0), scalar(1.0), scalar(-1.0), scalar(1.0), 3);
        assert!(matches!(bad_q, Err(LqrError::NotPsd)));
        let bad_r = LqrProblem::time_invariant(scalar(1.0), scalar(1.0), scalar(1.0), scalar(0.0), 3);
        assert!(matches!(bad_r, Err(LqrError::NotPd)));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, -0.5, 1.0]);
        let eye = DMatrix::identity(2, 2);
        assert!(LqrProblem::time_invariant(eye.clone(), eye.clone(), asym, eye.clone(), 3).is_err());
        let bad_dims = LqrProblem::time_invariant(
            DMatrix::identity(2, 2),
            DMatrix::zeros(3, 1),
            DMatrix::identity(2, 2),
            DMatrix::identity(1, 1),
            3,
        );
        assert!(matches!(bad_dims, Err(LqrError::Dimension(_))));
    }

    #[test]
    fn rollout_from_origin_stays_at_origin() {
        let p = unit_problem(6);
        let sol = solve_lqr(&p).unwrap();
        let (xs, us) = rollout(&p, &sol, &DVector::zeros(1));
        assert!(xs.iter().all(|x| x[0] == 0.0));
        assert!(us.iter().all(|u| u[0] == 0.0));
    }

    #[test]
    fn stable_scalar_rollout_contracts() {
        let p = unit_problem(30);
        let sol = solve_lqr(&p).unwrap();
        let (xs, _) = rollout(&p, &sol, &DVector::from_element(1, 3.0));
        for w in xs.windows(2) {
            assert!(w[1][0].abs() <= w[0][0].abs());
        }
    }

    #[test]
    fn feedback_beats_zero_control() {
        let n = 3;
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { 1.1 } else { 0.05 });
        let b = DMatrix::from_fn(n, 2, |i, j| ((i + 2 * j) as f64 * 0.3).sin());
        let q = DMatrix::identity(n, n);
        let r = DMatrix::identity(2, 2);
        let p = LqrProblem::time_invariant(a.clone(), b, q, r, 12).unwrap();
        let sol = solve_lqr(&p).unwrap();
        let x0 = DVector::from_row_slice(&[1.0, -2.0, 0.5]);
        let (xs, us) = rollout(&p, &sol, &x0);
        let lqr_cost = trajectory_cost(&p, &xs, &us);

        let mut x = x0.clone();
        let mut free_xs = vec![x.clone()];
        let zero_us: Vec<DVector<f64>> = (0..12).map(|_| DVector::zeros(2)).collect();
        for _ in 0..12 {
            x = &a * &x;
            free_xs.push(x.clone());
        }
        let free_cost = trajectory_cost(&p, &free_xs, &zero_us);
        assert!(lqr_cost <= free_cost);
        // And the optimal cost matches x0'P_0 x0.
        assert_relative_eq!(
            lqr_cost,
            (x0.transpose() * sol.p_at(0) * &x0)[(0, 0)],
            max_relative = 1e-9
        );
    }

    #[test]
    fn cost_to_go_matrices_stay_symmetric_and_psd() {
        let n = 4;
        let a = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) as f64 * 0.41).sin() * 0.6);
        let b = DMatrix::from_fn(n, 2, |i, j| ((i + j) as f64 * 0.17).cos());
        let g = DMatrix::from_fn(n, n, |i, j| ((i as f64 - j as f64) * 0.29).cos());
        let q = &g * g.transpose();
        let r = DMatrix::identity(2, 2) * 0.5;
        let p = LqrProblem::time_invariant(a, b, q, r, 40).unwrap();
        let sol = solve_lqr(&p).unwrap();
        for t in 0..=40 {
            let pt = sol.p_at(t);
            let asym = (pt - pt.transpose()).amax();
            assert!(asym < 1e-10, "P_{t} asymmetry {asym}");
            let eig = pt.clone().symmetric_eigen();
            assert!(eig.eigenvalues.iter().all(|&l| l > -1e-9));
        }
    }

    #[test]
    fn tracking_single_step_matches_hand_solution() {
        // A=B=Q=R=1, horizon 1: u* = (x_ref1 + u_ref0 - x0)/2.
        let problem = TrackingProblem {
            a: vec![scalar(1.0)],
            b: vec![scalar(1.0)],
            q: scalar(1.0),
            r: scalar(1.0),
            x_ref: vec![DVector::zeros(1), DVector::from_element(1, 2.0)],
            u_ref: vec![DVector::from_element(1, 0.5)],
        };
        let policy = solve_tracking(&problem).unwrap();
        assert_relative_eq!(policy.f[0][(0, 0)], 0.5);
        assert_relative_eq!(policy.k[0][(0, 0)], 1.25);
        let x0 = DVector::from_element(1, 1.0);
        let (xs, us) = rollout_tracking(&problem, &policy, &x0);
        assert_relative_eq!(us[0][0], 0.75); // (2 + 0.5 - 1)/2
        assert_relative_eq!(xs[1][0], 1.75);
    }

    #[test]
    fn tracking_with_zero_references_is_plain_lqr() {
        let n = 3;
        let a = DMatrix::from_fn(n, n, |i, j| ((i + 2 * j) as f64 * 0.23).sin());
        let b = DMatrix::from_fn(n, 2, |i, j| ((2 * i + j) as f64 * 0.31).cos());
        let q = DMatrix::identity(n, n) * 2.0;
        let r = DMatrix::identity(2, 2);
        let horizon = 7;
        let plain =
            LqrProblem::time_invariant(a.clone(), b.clone(), q.clone(), r.clone(), horizon)
                .unwrap();
        let sol = solve_lqr(&plain).unwrap();
        let tracking = TrackingProblem {
            a: vec![a; horizon],
            b: vec![b; horizon],
            q,
            r,
            x_ref: vec![DVector::zeros(n); horizon + 1],
            u_ref: vec![DVector::zeros(2); horizon],
        };
        let policy = solve_tracking(&tracking).unwrap();
        for t in 0..horizon {
            assert_relative_eq!(policy.f[t], sol.f_at(t).clone(), max_relative = 1e-12);
            assert!(policy.k[t].amax() < 1e-12);
        }
    }

    #[test]
    fn tracking_pins_a_constant_reference_with_cheap_control() {
        // Heavy Q and light R: states should settle onto the reference.
        let horizon = 40;
        let n = 2;
        let target = DVector::from_row_slice(&[0.3, -0.7]);
        let problem = TrackingProblem {
            a: vec![DMatrix::identity(n, n); horizon],
            b: vec![DMatrix::identity(n, n); horizon],
            q: DMatrix::identity(n, n) * 1e6,
            r: DMatrix::identity(n, n),
            x_ref: vec![target.clone(); horizon + 1],
            u_ref: vec![DVector::zeros(n); horizon],
        };
        let policy = solve_tracking(&problem).unwrap();
        let (xs, _) = rollout_tracking(&problem, &policy, &DVector::zeros(n));
        let err = (&xs[horizon / 2] - &target).amax();
        assert!(err < 1e-3, "tracking error {err}");
    }
}
