//! Damped least-squares inverse kinematics with a fixed seed fan.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::RigidPose;
use crate::linalg::solve_dense;

use super::arm::{ArmModel, JointConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkParams {
    pub position_tol: f64,
    pub orientation_tol: f64,
    pub max_iterations: usize,
    pub initial_damping: f64,
    pub min_damping: f64,
    pub max_damping: f64,
    /// Largest joint change per iteration, radians.
    pub max_step: f64,
}

impl Default for IkParams {
    fn default() -> Self {
        Self {
            position_tol: 1e-6,
            orientation_tol: 1e-6,
            max_iterations: 200,
            initial_damping: 1e-3,
            min_damping: 1e-9,
            max_damping: 1e3,
            max_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkSolution {
    pub q: JointConfig,
    pub iterations: usize,
    /// 0 for the caller's seed, then the fallback fan in order.
    pub seed_index: usize,
    pub position_error: f64,
    pub orientation_error: f64,
}

/// Failure to converge from every seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unreachable {
    pub best_position_error: f64,
    pub best_orientation_error: f64,
    /// The target lies outside the reach sphere; no iteration was attempted.
    pub beyond_reach: bool,
}

fn error6(arm: &ArmModel, q: &JointConfig, target: &RigidPose) -> ([f64; 6], f64, f64) {
    let cur = arm.forward_kinematics(q);
    let dp = target.translation - cur.translation;
    let dr = target.rotation.compose(&cur.rotation.inverse()).to_rotation_vector();
    ([dp.x, dp.y, dp.z, dr.x, dr.y, dr.z], dp.norm(), dr.norm())
}

fn cost(e: &[f64; 6]) -> f64 {
    e.iter().map(|v| v * v).sum()
}

/// World-frame geometric Jacobian of the tool point, rows `[v; ω]`.
pub fn jacobian(arm: &ArmModel, q: &JointConfig) -> [[f64; 6]; 6] {
    let frames = arm.joint_frames(q);
    let tool = arm.tool_frame_from(&frames[6]).origin;
    let mut j = [[0.0; 6]; 6];
    for i in 0..6 {
        let z = frames[i].axis(2);
        let v = z.cross(tool - frames[i].origin);
        let col = [v.x, v.y, v.z, z.x, z.y, z.z];
        for r in 0..6 {
            j[r][i] = col[r];
        }
    }
    j
}

/// Deterministic fallback seeds: home, home with single-joint
/// perturbations, then base rotations combined with elbow and wrist flips.
pub fn seed_fan(arm: &ArmModel) -> Vec<JointConfig> {
    use core::f64::consts::{FRAC_PI_2, PI};
    let home = arm.home;
    let mut fan = alloc::vec![home];
    for j in 0..6 {
        for s in [0.8, -0.8] {
            let mut q = home.0;
            q[j] += s;
            fan.push(arm.clamp(&JointConfig(q)));
        }
    }
    for base in [0.0, FRAC_PI_2, -FRAC_PI_2, PI] {
        for elbow in [1.0, -1.0] {
            for wrist in [1.0, -1.0] {
                if base == 0.0 && elbow > 0.0 && wrist > 0.0 {
                    continue;
                }
                let mut q = home.0;
                q[0] += base;
                q[2] *= elbow;
                if elbow < 0.0 {
                    q[1] += 0.8;
                }
                q[4] *= wrist;
                fan.push(arm.clamp(&JointConfig(q)));
            }
        }
    }
    // Low-discrepancy cover of the joint box (Halton bases 2..13).
    const PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];
    for k in 1..=HALTON_SEEDS {
        let mut q = [0.0; 6];
        for j in 0..6 {
            let (lo, hi) = arm.limits[j];
            q[j] = lo + (hi - lo) * radical_inverse(k, PRIMES[j]);
        }
        fan.push(JointConfig(q));
    }
    fan
}

const HALTON_SEEDS: u32 = 64;

fn radical_inverse(mut i: u32, base: u32) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut r) = (inv, 0.0);
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Damped least-squares step `Δq = Jᵀ (J Jᵀ + μ² I)⁻¹ e`, scaled to
/// `max_step`. Joints whose step would cross a limit are parked on the limit
/// and the remaining joints are re-solved against the leftover error.
fn limited_step(arm: &ArmModel, q: &JointConfig, j: &[[f64; 6]; 6], e: &[f64; 6], mu: f64, max_step: f64) -> Option<[f64; 6]> {
    let mut locked = [false; 6];
    let mut fixed = [0.0; 6];
    loop {
        let mut rhs = *e;
        for k in 0..6 {
            if locked[k] {
                for r in 0..6 {
                    rhs[r] -= j[r][k] * fixed[k];
                }
            }
        }
        let mut a = [[0.0; 6]; 6];
        for r in 0..6 {
            for s in 0..6 {
                let mut acc = 0.0;
                for k in 0..6 {
                    if !locked[k] {
                        acc += j[r][k] * j[s][k];
                    }
                }
                a[r][s] = acc;
            }
            a[r][r] += mu * mu;
        }
        let y = solve_dense(a, rhs).ok()?;
        let mut dq = fixed;
        for k in 0..6 {
            if !locked[k] {
                dq[k] = (0..6).map(|r| j[r][k] * y[r]).sum();
            }
        }
        let norm = dq.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if norm > max_step {
            let s = max_step / norm;
            dq.iter_mut().for_each(|v| *v *= s);
        }
        let mut changed = false;
        for k in 0..6 {
            let (lo, hi) = arm.limits[k];
            let next = q.0[k] + dq[k];
            if !locked[k] && (next < lo || next > hi) {
                locked[k] = true;
                fixed[k] = next.clamp(lo, hi) - q.0[k];
                changed = true;
            }
        }
        if !changed {
            return Some(dq);
        }
    }
}

fn solve_from(arm: &ArmModel, target: &RigidPose, seed: JointConfig, p: &IkParams) -> (JointConfig, usize, f64, f64, bool) {
    let mut q = arm.clamp(&seed);
    let (mut e, mut ep, mut er) = error6(arm, &q, target);
    let mut c = cost(&e);
    let mut mu = p.initial_damping;
    for it in 0..=p.max_iterations {
        if ep <= p.position_tol && er <= p.orientation_tol {
            return (q, it, ep, er, true);
        }
        if it == p.max_iterations {
            break;
        }
        let j = jacobian(arm, &q);
        let Some(dq) = limited_step(arm, &q, &j, &e, mu, p.max_step) else {
            mu = (mu * 2.0).min(p.max_damping);
            continue;
        };
        let mut cand = q.0;
        for k in 0..6 {
            cand[k] += dq[k];
        }
        let cand = arm.clamp(&JointConfig(cand));
        let (ce, cp, cr) = error6(arm, &cand, target);
        let cc = cost(&ce);
        if cc < c {
            q = cand;
            (e, ep, er, c) = (ce, cp, cr, cc);
            mu = (mu * 0.5).max(p.min_damping);
        } else {
            mu *= 2.0;
            if mu > p.max_damping {
                break;
            }
        }
    }
    (q, p.max_iterations, ep, er, false)
}

/// Solves for joints placing the tool at `target`, trying `seed` first and
/// then the fixed fan.
pub fn inverse_kinematics(arm: &ArmModel, target: &RigidPose, seed: &JointConfig, p: &IkParams) -> Result<IkSolution, Unreachable> {
    let reach = target.translation.distance(arm.base.translation);
    if !target.is_finite() || reach > arm.reach_radius() {
        return Err(Unreachable {
            best_position_error: f64::INFINITY,
            best_orientation_error: f64::INFINITY,
            beyond_reach: true,
        });
    }
    let mut best = (f64::INFINITY, f64::INFINITY);
    let seeds = core::iter::once(*seed).chain(seed_fan(arm));
    for (idx, s) in seeds.enumerate() {
        if !s.is_finite() {
            continue;
        }
        let (q, iterations, ep, er, ok) = solve_from(arm, target, s, p);
        if ok && arm.within_limits(&q) {
            return Ok(IkSolution {
                q,
                iterations,
                seed_index: idx,
                position_error: ep,
                orientation_error: er,
            });
        }
        if ep + er < best.0 + best.1 {
            best = (ep, er);
        }
    }
    Err(Unreachable {
        best_position_error: best.0,
        best_orientation_error: best.1,
        beyond_reach: false,
    })
}

/// Residual of `q` against `target`: `(position m, orientation rad)`.
pub fn pose_residual(arm: &ArmModel, q: &JointConfig, target: &RigidPose) -> (f64, f64) {
    let (_, ep, er) = error6(arm, q, target);
    (ep, er)
}
