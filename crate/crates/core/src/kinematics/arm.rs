//! Standard-DH serial arm model and forward kinematics.

use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{Mat3, RigidPose, Rotation, Vec3};

use super::KinematicsError;

/// One standard Denavit-Hartenberg row: `Rz(θ + offset) · Tz(d) · Tx(a) · Rx(α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta_offset: f64,
}

impl DhRow {
    pub const fn new(a: f64, alpha: f64, d: f64, theta_offset: f64) -> Self {
        Self { a, alpha, d, theta_offset }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointConfig(pub [f64; 6]);

impl JointConfig {
    pub const ZERO: JointConfig = JointConfig([0.0; 6]);

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|q| q.is_finite())
    }

    pub fn lerp(&self, other: &JointConfig, t: f64) -> JointConfig {
        let mut out = [0.0; 6];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i] + (other.0[i] - self.0[i]) * t;
        }
        JointConfig(out)
    }

    pub fn max_abs_diff(&self, other: &JointConfig) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Rigid frame kept as a rotation matrix for fast chaining.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub rotation: Mat3,
    pub origin: Vec3,
}

impl Frame {
    pub fn from_pose(p: &RigidPose) -> Self {
        Self {
            rotation: p.rotation.to_matrix(),
            origin: p.translation,
        }
    }

    pub fn to_pose(&self) -> RigidPose {
        RigidPose::new(Rotation::from_matrix(&self.rotation), self.origin)
    }

    pub fn axis(&self, k: usize) -> Vec3 {
        self.rotation.column(k)
    }

    fn then_dh(&self, row: &DhRow, q: f64) -> Frame {
        let (st, ct) = (q + row.theta_offset).sin_cos();
        let (sa, ca) = row.alpha.sin_cos();
        let local = Mat3([[ct, -st * ca, st * sa], [st, ct * ca, -ct * sa], [0.0, sa, ca]]);
        let offset = Vec3::new(row.a * ct, row.a * st, row.d);
        Frame {
            rotation: self.rotation.mul_mat(&local),
            origin: self.origin + self.rotation.mul_vec(offset),
        }
    }
}

/// Six-joint revolute arm with a parallel gripper.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmModel {
    pub dh: [DhRow; 6],
    /// `(lo, hi)` per joint, radians.
    pub limits: [(f64, f64); 6],
    /// World pose of the base frame.
    pub base: RigidPose,
    /// Distance from the flange to the tool point along the flange z axis.
    pub tool_offset: f64,
    /// Capsule radius per link.
    pub link_radii: [f64; 6],
    pub gripper_radius: f64,
    /// Length of the gripper body capsule, measured from the flange. The
    /// fingers beyond it are not modeled.
    pub gripper_length: f64,
    /// Rest configuration, also the root of the IK seed fan.
    pub home: JointConfig,
}

impl ArmModel {
    pub fn validate(&self) -> Result<(), KinematicsError> {
        for (i, (lo, hi)) in self.limits.iter().enumerate() {
            if !(lo < hi) {
                return Err(KinematicsError::InvalidModel { reason: "joint limits must satisfy lo < hi", joint: Some(i) });
            }
        }
        if !(self.tool_offset >= 0.0) {
            return Err(KinematicsError::InvalidModel { reason: "tool offset must be non-negative", joint: None });
        }
        if !(self.gripper_length >= 0.0 && self.gripper_length <= self.tool_offset) {
            return Err(KinematicsError::InvalidModel { reason: "gripper length must lie in [0, tool_offset]", joint: None });
        }
        if self.link_radii.iter().any(|r| !(*r >= 0.0)) || !(self.gripper_radius >= 0.0) {
            return Err(KinematicsError::InvalidModel { reason: "capsule radii must be non-negative", joint: None });
        }
        if !self.base.is_finite() || self.dh.iter().any(|r| !(r.a.is_finite() && r.d.is_finite() && r.alpha.is_finite())) {
            return Err(KinematicsError::InvalidModel { reason: "geometry must be finite", joint: None });
        }
        if !self.within_limits(&self.home) {
            return Err(KinematicsError::InvalidModel { reason: "home configuration violates limits", joint: None });
        }
        Ok(())
    }

    pub fn within_limits(&self, q: &JointConfig) -> bool {
        q.0.iter().zip(self.limits.iter()).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    pub fn clamp(&self, q: &JointConfig) -> JointConfig {
        let mut out = q.0;
        for (v, (lo, hi)) in out.iter_mut().zip(self.limits.iter()) {
            *v = v.clamp(*lo, *hi);
        }
        JointConfig(out)
    }

    /// Upper bound on the tool distance from the base origin.
    pub fn reach_radius(&self) -> f64 {
        self.dh.iter().map(|r| r.a.abs() + r.d.abs()).sum::<f64>() + self.tool_offset
    }

    /// Base frame followed by the six joint frames.
    pub fn joint_frames(&self, q: &JointConfig) -> [Frame; 7] {
        let mut frames = [Frame::from_pose(&self.base); 7];
        for i in 0..6 {
            frames[i + 1] = frames[i].then_dh(&self.dh[i], q.0[i]);
        }
        frames
    }

    pub fn tool_frame_from(&self, flange: &Frame) -> Frame {
        Frame {
            rotation: flange.rotation,
            origin: flange.origin + flange.axis(2) * self.tool_offset,
        }
    }

    /// World-frame tool pose.
    pub fn forward_kinematics(&self, q: &JointConfig) -> RigidPose {
        let frames = self.joint_frames(q);
        self.tool_frame_from(&frames[6]).to_pose()
    }

    /// Tool pose relative to the base frame.
    pub fn forward_kinematics_local(&self, q: &JointConfig) -> RigidPose {
        self.base.inverse().compose(&self.forward_kinematics(q))
    }
}

/// Reference six-joint arm: UR-style standard DH with link lengths of a
/// roughly 0.88 m reach cobot. Not vendor-exact.
pub fn reference_arm(base: RigidPose) -> ArmModel {
    let lim = 175f64.to_radians();
    ArmModel {
        dh: [
            DhRow::new(0.0, PI / 2.0, 0.0985, 0.0),
            DhRow::new(-0.408, 0.0, 0.0, 0.0),
            DhRow::new(-0.376, 0.0, 0.0, 0.0),
            DhRow::new(0.0, PI / 2.0, 0.1215, 0.0),
            DhRow::new(0.0, -PI / 2.0, 0.1025, 0.0),
            DhRow::new(0.0, 0.0, 0.094, 0.0),
        ],
        limits: [(-lim, lim); 6],
        base,
        tool_offset: 0.16,
        link_radii: [0.06, 0.05, 0.045, 0.04, 0.04, 0.04],
        gripper_radius: 0.04,
        gripper_length: 0.11,
        home: JointConfig([0.0, -1.88, 1.70, -1.39, -PI / 2.0, 0.0]),
    }
}
