//! Dual 6R arm kinematics and collision validation.

mod arm;
mod collision;
mod ik;

pub use arm::*;
pub use collision::*;
pub use ik::*;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("invalid arm model: {reason}")]
    InvalidModel { reason: &'static str, joint: Option<usize> },
    #[error("path endpoint {endpoint} violates joint limits")]
    LimitsViolated { endpoint: usize },
    #[error("obstacle `{id}` has non-positive extents")]
    InvalidObstacle { id: alloc::string::String },
}

use crate::demonstration::{Arm, ArmBases};

/// The two arms of a bimanual rig.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmPair {
    pub left: ArmModel,
    pub right: ArmModel,
}

impl ArmPair {
    pub fn get(&self, arm: Arm) -> &ArmModel {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }

    pub fn bases(&self) -> ArmBases {
        ArmBases {
            left: self.left.base,
            right: self.right.base,
        }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        self.left.validate()?;
        self.right.validate()
    }
}
