//! Synthetic tabletop workspace: primitive objects, a top-down camera, the
//! two-arm rig, scripted demonstrations and task fixtures.

mod fixtures;
mod render;
mod script;

pub use fixtures::*;
pub use render::*;
pub use script::*;

use alloc::collections::BTreeMap;
use alloc::string::String;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::demonstration::ArmBases;
use crate::geometry::{wrap_angle, CameraModel, RigidPose, Rotation, Vec3};
use crate::kinematics::{reference_arm, Aabb, ArmPair, CollisionScene};
use crate::perception::{estimate_pose, ideal_estimate, PerceptionError, PerceptionParams};
use crate::synthesis::{ObjectShape, Rect, SceneInstance};

/// Table rectangle, camera mount and arm placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkspaceSpec {
    /// Extent along world x, the axis joining the two arm bases.
    pub size_x: f64,
    pub size_y: f64,
    pub table_z: f64,
    pub camera_height: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub focal: f64,
    /// Distance of each arm base from the table center along x.
    pub base_offset: f64,
}

impl Default for WorkspaceSpec {
    fn default() -> Self {
        Self {
            size_x: 0.675,
            size_y: 0.615,
            table_z: 0.0,
            camera_height: 1.0,
            image_width: 960,
            image_height: 540,
            focal: 800.0,
            base_offset: 0.55,
        }
    }
}

impl WorkspaceSpec {
    pub fn is_valid(&self) -> bool {
        self.size_x > 0.0
            && self.size_y > 0.0
            && self.camera_height > 0.0
            && self.focal > 0.0
            && self.image_width > 0
            && self.image_height > 0
            && self.base_offset > 0.5 * self.size_x
    }

    pub fn rect(&self) -> Rect {
        Rect::centered(self.size_x, self.size_y)
    }

    pub fn camera(&self) -> CameraModel {
        top_down_camera(self.image_width, self.image_height, self.focal, self.camera_height, self.table_z)
    }

    /// Left base on the `-x` edge facing `+x`, right base mirrored.
    pub fn arm_bases(&self) -> ArmBases {
        ArmBases {
            left: RigidPose::new(
                Rotation::from_yaw(core::f64::consts::PI),
                Vec3::new(-self.base_offset, 0.0, self.table_z),
            ),
            right: RigidPose::from_translation(Vec3::new(self.base_offset, 0.0, self.table_z)),
        }
    }

    pub fn arms(&self) -> ArmPair {
        let b = self.arm_bases();
        ArmPair {
            left: reference_arm(b.left),
            right: reference_arm(b.right),
        }
    }

    /// Table plane and a bounding volume covering both arms' reach.
    pub fn empty_collision_scene(&self) -> CollisionScene {
        let r = self.base_offset + 1.2;
        CollisionScene::new(
            self.table_z,
            Aabb {
                min: Vec3::new(-r, -r, self.table_z),
                max: Vec3::new(r, r, self.table_z + 1.5),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("perception failed for `{id}`: {source}")]
    Perception { id: String, source: PerceptionError },
}

/// Render-then-estimate error for one object.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTripError {
    /// Distance between the estimated and true top-face centers, m.
    pub position: f64,
    /// Yaw error modulo π, rad; `None` for rotationally symmetric objects.
    pub yaw: Option<f64>,
}

/// Renders `scene`, estimates every object and compares against the truth.
/// Box yaw is compared modulo π; cylinders report position only and go
/// through the degenerate fallback.
pub fn roundtrip_pose_error(
    scene: &SceneInstance,
    cam: &CameraModel,
    params: &PerceptionParams,
) -> Result<BTreeMap<String, RoundTripError>, HarnessError> {
    let obs = render_observation(scene, cam, params.table_z)?;
    let mut out = BTreeMap::new();
    for (id, obj) in &scene.objects {
        let (mask, depth) = obs.view(id).expect("rendered every object");
        let symmetric = matches!(obj.shape, ObjectShape::Cylinder { .. });
        let est = if symmetric {
            crate::perception::estimate_pose_with_fallback(mask, depth, cam, params)
        } else {
            estimate_pose(mask, depth, cam, params)
        }
        .map_err(|source| HarnessError::Perception { id: id.clone(), source })?;
        let truth = ideal_estimate(obj, params.reference_axis);
        let position = est.pose.translation.distance(truth.pose.translation);
        let yaw = (!symmetric).then(|| yaw_error_mod_pi(est.pose.rotation.yaw(), truth.pose.rotation.yaw()));
        out.insert(id.clone(), RoundTripError { position, yaw });
    }
    Ok(out)
}

/// Absolute yaw difference folded into `[0, π/2]`.
pub fn yaw_error_mod_pi(a: f64, b: f64) -> f64 {
    let d = wrap_angle(2.0 * (a - b)).abs() * 0.5;
    d.min(core::f64::consts::PI - d)
}
