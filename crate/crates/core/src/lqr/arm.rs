//! Simulated 7-revolute-joint serial arm: forward kinematics, the position
//! Jacobian, damped-least-squares inverse kinematics, and the clamped
//! joint-space integrator dynamics the swipe optimizer controls.
//!
//! Joint i rotates about z for even i and y for odd i, then translates along
//! its local x by the fixed link length. All joints at zero puts the
//! end-effector at (1.43, 0, 0).

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::ilqr::Dynamics;

pub const N_JOINTS: usize = 7;

/// Link lengths in meters, shoulder to fingertip.
pub const LINK_LENGTHS: [f64; N_JOINTS] = [0.27, 0.07, 0.36, 0.07, 0.37, 0.01, 0.28];

/// Joint angles clamp to this magnitude.
pub const JOINT_LIMIT: f64 = std::f64::consts::PI;

/// Per-step joint delta clamp in radians.
pub const MAX_STEP: f64 = 0.02;

fn axis_is_z(joint: usize) -> bool {
    joint.is_multiple_of(2)
}

fn rotation(joint: usize, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    if axis_is_z(joint) {
        Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
    } else {
        Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
    }
}

/// World positions of every joint origin plus the end-effector, and each
/// joint's world rotation axis.
fn chain(angles: &[f64; N_JOINTS]) -> ([Vector3<f64>; N_JOINTS + 1], [Vector3<f64>; N_JOINTS]) {
    let mut origins = [Vector3::zeros(); N_JOINTS + 1];
    let mut axes = [Vector3::zeros(); N_JOINTS];
    let mut rot = Matrix3::identity();
    let mut pos = Vector3::zeros();
    for i in 0..N_JOINTS {
        origins[i] = pos;
        axes[i] = if axis_is_z(i) {
            rot * Vector3::z()
        } else {
            rot * Vector3::y()
        };
        rot *= rotation(i, angles[i]);
        pos += rot * Vector3::new(LINK_LENGTHS[i], 0.0, 0.0);
    }
    origins[N_JOINTS] = pos;
    (origins, axes)
}

/// End-effector position in meters.
pub fn forward_kinematics(angles: &[f64; N_JOINTS]) -> Vector3<f64> {
    chain(angles).0[N_JOINTS]
}

/// 3x7 position Jacobian: column i is axis_i x (ee - origin_i).
pub fn jacobian(angles: &[f64; N_JOINTS]) -> DMatrix<f64> {
    let (origins, axes) = chain(angles);
    let ee = origins[N_JOINTS];
    let mut j = DMatrix::zeros(3, N_JOINTS);
    for i in 0..N_JOINTS {
        let col = axes[i].cross(&(ee - origins[i]));
        for r in 0..3 {
            j[(r, i)] = col[r];
        }
    }
    j
}

/// Damped-least-squares inverse kinematics from `seed`:
/// dq = J' (J J' + lambda^2 I)^-1 e, iterated until the position error or the
/// update stalls. Returns the angles and the final position error norm.
pub fn dls_ik(
    target: &Vector3<f64>,
    seed: &[f64; N_JOINTS],
    lambda: f64,
    max_iterations: usize,
) -> ([f64; N_JOINTS], f64) {
    let mut q = *seed;
    let mut best_q = q;
    let mut best_err = (target - forward_kinematics(&q)).norm();
    for _ in 0..max_iterations {
        let e = target - forward_kinematics(&q);
        if e.norm() < 1e-12 {
            break;
        }
        let j = jacobian(&q);
        let jjt = &j * j.transpose() + DMatrix::identity(3, 3) * (lambda * lambda);
        let e_dyn = DVector::from_column_slice(e.as_slice());
        let y = jjt.lu().solve(&e_dyn).unwrap_or_else(|| DVector::zeros(3));
        let dq = j.transpose() * y;
        for (qi, d) in q.iter_mut().zip(dq.iter()) {
            *qi = (*qi + d).clamp(-JOINT_LIMIT, JOINT_LIMIT);
        }
        let err = (target - forward_kinematics(&q)).norm();
        if err < best_err {
            best_err = err;
            best_q = q;
        }
        if dq.amax() < 1e-14 {
            break;
        }
    }
    (best_q, best_err)
}

/// Joint-space integrator with clamped inputs and joint limits:
/// x' = clamp(x + clamp(u, max step), joint limit).
#[derive(Clone, Copy, Debug, Default)]
pub struct ArmDynamics;

impl Dynamics for ArmDynamics {
    fn state_dim(&self) -> usize {
        N_JOINTS
    }

    fn control_dim(&self) -> usize {
        N_JOINTS
    }

    fn step(&self, x: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(N_JOINTS, |i, _| {
            let du = u[i].clamp(-MAX_STEP, MAX_STEP);
            (x[i] + du).clamp(-JOINT_LIMIT, JOINT_LIMIT)
        })
    }
}

/// Total reach of the chain, the Lipschitz constant of the position map.
pub fn total_reach() -> f64 {
    LINK_LENGTHS.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{domain, stream};
    use approx::assert_relative_eq;
    use rand::Rng;

    #[test]
    fn home_position_is_the_full_extension() {
        let home = forward_kinematics(&[0.0; N_JOINTS]);
        assert_relative_eq!(home, Vector3::new(1.43, 0.0, 0.0), epsilon = 1e-12);
    }

    #[test]
    fn rotating_the_base_by_pi_flips_x_and_y() {
        let mut q = [0.0; N_JOINTS];
        q[0] = std::f64::consts::PI;
        let p = forward_kinematics(&q);
        assert_relative_eq!(p, Vector3::new(-1.43, 0.0, 0.0), epsilon = 1e-12);

        let mut rng = stream(3, domain::TRAIN, 77);
        for _ in 0..20 {
            let mut q: [f64; N_JOINTS] = [0.0; N_JOINTS];
            for qi in q.iter_mut() {
                *qi = rng.gen_range(-1.0..1.0);
            }
            let p = forward_kinematics(&q);
            let mut q_flipped = q;
            q_flipped[0] += std::f64::consts::PI;
            let pf = forward_kinematics(&q_flipped);
            assert_relative_eq!(pf.x, -p.x, epsilon = 1e-9);
            assert_relative_eq!(pf.y, -p.y, epsilon = 1e-9);
            assert_relative_eq!(pf.z, p.z, epsilon = 1e-9);
        }
    }

    #[test]
    fn position_map_is_lipschitz_in_total_reach() {
        let mut rng = stream(4, domain::TRAIN, 78);
        let reach = total_reach();
        for _ in 0..200 {
            let mut q1 = [0.0; N_JOINTS];
            let mut q2 = [0.0; N_JOINTS];
            for i in 0..N_JOINTS {
                q1[i] = rng.gen_range(-3.0..3.0);
                q2[i] = q1[i] + rng.gen_range(-0.1..0.1);
            }
            let dpos = (forward_kinematics(&q1) - forward_kinematics(&q2)).norm();
            let dq: f64 = q1.iter().zip(&q2).map(|(a, b)| (a - b).abs()).sum();
            assert!(dpos <= reach * dq + 1e-12, "{dpos} > {reach} * {dq}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = stream(5, domain::TRAIN, 79);
        for _ in 0..20 {
            let mut q = [0.0; N_JOINTS];
            for qi in q.iter_mut() {
                *qi = rng.gen_range(-1.5..1.5);
            }
            let j = jacobian(&q);
            let h = 1e-6;
            for i in 0..N_JOINTS {
                let mut qp = q;
                let mut qm = q;
                qp[i] += h;
                qm[i] -= h;
                let col = (forward_kinematics(&qp) - forward_kinematics(&qm)) / (2.0 * h);
                for r in 0..3 {
                    assert!(
                        (j[(r, i)] - col[r]).abs() < 1e-7,
                        "J[{r},{i}] {} vs fd {}",
                        j[(r, i)],
                        col[r]
                    );
                }
            }
        }
    }

    #[test]
    fn ik_reaches_nearby_targets() {
        let home = forward_kinematics(&[0.0; N_JOINTS]);
        let target = home + Vector3::new(-0.1, 0.05, -0.1);
        let (q, err) = dls_ik(&target, &[0.0; N_JOINTS], 0.05, 200);
        assert!(err < 1e-8, "residual {err}");
        assert_relative_eq!(forward_kinematics(&q), target, epsilon = 1e-7);
    }

    #[test]
    fn ik_on_unreachable_target_returns_best_effort() {
        let target = Vector3::new(5.0, 0.0, 0.0);
        let (q, err) = dls_ik(&target, &[0.0; N_JOINTS], 0.05, 100);
        // Best it can do is full extension toward the target.
        assert!(err >= 5.0 - total_reach() - 1e-6);
        assert!(forward_kinematics(&q).norm() <= total_reach() + 1e-9);
    }

    #[test]
    fn dynamics_clamp_steps_and_angles() {
        let d = ArmDynamics;
        let x = DVector::from_element(N_JOINTS, JOINT_LIMIT - 0.002);
        let u = DVector::from_element(N_JOINTS, 1.0);
        let next = d.step(&x, &u);
        for i in 0..N_JOINTS {
            assert!(next[i] <= JOINT_LIMIT);
            assert!(next[i] - x[i] <= MAX_STEP + 1e-15);
        }
        let u_small = DVector::from_element(N_JOINTS, 0.001);
        let x0 = DVector::zeros(N_JOINTS);
        let next = d.step(&x0, &u_small);
        for i in 0..N_JOINTS {
            assert_eq!(next[i], 0.001);
        }
    }

    #[test]
    fn mirroring_yaw_joints_mirrors_the_position_exactly() {
        let mut rng = stream(6, domain::TRAIN, 80);
        for _ in 0..50 {
            let mut q = [0.0; N_JOINTS];
            for qi in q.iter_mut() {
                *qi = rng.gen_range(-2.0..2.0);
            }
            let mut qm = q;
            for (i, qi) in qm.iter_mut().enumerate() {
                if axis_is_z(i) {
                    *qi = -*qi;
                }
            }
            let p = forward_kinematics(&q);
            let pm = forward_kinematics(&qm);
            // Bitwise equality: sin(-t) = -sin(t) exactly in IEEE floats and
            // every downstream product preserves the sign pattern.
            assert_eq!(pm.x.to_bits(), p.x.to_bits());
            assert_eq!(pm.y.to_bits(), (-p.y).to_bits());
            assert_eq!(pm.z.to_bits(), p.z.to_bits());
        }
    }
}
