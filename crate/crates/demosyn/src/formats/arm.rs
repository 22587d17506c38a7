use std::path::Path;

use demosyn_core::kinematics::{ArmModel, DhRow, JointConfig};
use serde::{Deserialize, Serialize};

use super::{read_json, write_json, FormatError, PoseRecord};

pub const ARM_FORMAT: &str = "demosyn-arm/1";

/// Standard DH row, meters and radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhRecord {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    pub theta_offset: f64,
}

/// Arm description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmRecord {
    pub format: String,
    pub base: PoseRecord,
    pub dh: [DhRecord; 6],
    /// `[lo, hi]` per joint, radians.
    pub limits: [[f64; 2]; 6],
    pub tool_offset: f64,
    pub link_radii: [f64; 6],
    pub gripper_radius: f64,
    pub gripper_length: f64,
    pub home: [f64; 6],
}

impl From<&ArmModel> for ArmRecord {
    fn from(a: &ArmModel) -> Self {
        Self {
            format: ARM_FORMAT.into(),
            base: (&a.base).into(),
            dh: a.dh.map(|r| DhRecord {
                a: r.a,
                alpha: r.alpha,
                d: r.d,
                theta_offset: r.theta_offset,
            }),
            limits: a.limits.map(|(lo, hi)| [lo, hi]),
            tool_offset: a.tool_offset,
            link_radii: a.link_radii,
            gripper_radius: a.gripper_radius,
            gripper_length: a.gripper_length,
            home: a.home.0,
        }
    }
}

impl ArmRecord {
    pub fn to_model(&self, path: &Path) -> Result<ArmModel, FormatError> {
        if self.format != ARM_FORMAT {
            return Err(FormatError::invalid(path, format!("unsupported format `{}`, expected `{ARM_FORMAT}`", self.format)));
        }
        let model = ArmModel {
            dh: self.dh.map(|r| DhRow::new(r.a, r.alpha, r.d, r.theta_offset)),
            limits: self.limits.map(|[lo, hi]| (lo, hi)),
            base: self.base.to_pose_at(path, "base")?,
            tool_offset: self.tool_offset,
            link_radii: self.link_radii,
            gripper_radius: self.gripper_radius,
            gripper_length: self.gripper_length,
            home: JointConfig(self.home),
        };
        model.validate().map_err(|e| FormatError::invalid(path, e.to_string()))?;
        Ok(model)
    }
}

pub fn load_arm(path: &Path) -> Result<ArmModel, FormatError> {
    read_json::<ArmRecord>(path)?.to_model(path)
}

pub fn save_arm(path: &Path, arm: &ArmModel) -> Result<(), FormatError> {
    write_json(path, &ArmRecord::from(arm))
}
