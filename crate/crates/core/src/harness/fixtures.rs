//! Ready-made tasks: a seed demonstration, its task spec and block overrides.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use core::f64::consts::{FRAC_PI_2, PI};

use crate::demonstration::{Arm, ArmState, Demonstration, Gripper, KindOverride, SeedObject};
use crate::geometry::{RigidPose, Rotation, Vec3};
use crate::perception::{estimate_pose_with_fallback, PerceptionParams};
use crate::synthesis::{InstanceSpec, ObjectShape, Region, RoleSpec, SceneInstance, SceneObject, TaskSpec};

use super::{render_objects, WorkspaceSpec};

/// Seed demonstration plus everything needed to synthesize from it.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskFixture {
    pub workspace: WorkspaceSpec,
    pub spec: TaskSpec,
    pub demo: Demonstration,
    pub overrides: BTreeMap<usize, KindOverride>,
    /// Objects of the scene the demonstration was recorded in.
    pub seed_scene: Vec<SceneObject>,
}

impl TaskFixture {
    /// The seed scene as a scene instance.
    pub fn seed_instance(&self) -> SceneInstance {
        SceneInstance {
            index: 0,
            scene_seed: 0,
            workspace: self.spec.workspace,
            objects: self.seed_scene.iter().map(|o| (o.id.clone(), o.clone())).collect(),
            cells: BTreeMap::new(),
        }
    }
}

/// Tool pointing straight down with its x axis at `yaw`.
pub fn tool_down(yaw: f64) -> Rotation {
    Rotation::from_yaw(yaw).compose(&Rotation::from_axis_angle(Vec3::X, PI))
}

fn pose(x: f64, y: f64, z: f64, rot: Rotation) -> RigidPose {
    RigidPose::new(rot, Vec3::new(x, y, z))
}

fn home_states(ws: &WorkspaceSpec) -> (ArmState, ArmState) {
    let arms = ws.arms();
    (
        ArmState::new(arms.left.forward_kinematics(&arms.left.home), Gripper::Open),
        ArmState::new(arms.right.forward_kinematics(&arms.right.home), Gripper::Open),
    )
}

/// Seed objects as a camera would report them: rendered and estimated, with
/// the ground truth kept alongside.
fn observe_seed(ws: &WorkspaceSpec, objects: &[SceneObject]) -> BTreeMap<String, SeedObject> {
    let refs: Vec<&SceneObject> = objects.iter().collect();
    let cam = ws.camera();
    let obs = render_objects(&refs, &cam, ws.table_z).expect("seed scene inside the frustum");
    let params = PerceptionParams {
        table_z: ws.table_z,
        ..PerceptionParams::default()
    };
    objects
        .iter()
        .map(|o| {
            let (mask, depth) = obs.view(&o.id).expect("rendered");
            let estimate = estimate_pose_with_fallback(mask, depth, &cam, &params).expect("seed object visible");
            (
                o.id.clone(),
                SeedObject {
                    estimate,
                    ground_truth: Some(o.clone()),
                },
            )
        })
        .collect()
}

fn boxed(id: &str, l: f64, w: f64, h: f64) -> InstanceSpec {
    InstanceSpec {
        id: id.into(),
        shape: ObjectShape::Box { l, w, h },
    }
}

fn cylinder(id: &str, radius: f64, height: f64) -> InstanceSpec {
    InstanceSpec {
        id: id.into(),
        shape: ObjectShape::Cylinder { radius, height },
    }
}

/// Single-arm pick, reorient and place of a box in the left half of the
/// table: 4 box instances × 7 yaws × 6 × 6 cells.
///
/// Blocks of the seed: 0 transit above the object, 1 descend and grasp
/// (variable), 2 lift (variable by override), 3 carry and turn, 4 lower and
/// release, 5 retreat, 6 right-arm motion, 7 both arms return.
pub fn reorient_fixture() -> TaskFixture {
    let ws = WorkspaceSpec::default();
    let spec = TaskSpec {
        name: "reorient".into(),
        workspace: ws.rect(),
        table_z: ws.table_z,
        roles: alloc::vec![RoleSpec {
            object_id: "box".into(),
            region: Region::LeftHalf,
            rows: 6,
            cols: 6,
            instances: alloc::vec![
                boxed("box-a", 0.16, 0.06, 0.06),
                boxed("box-b", 0.14, 0.06, 0.05),
                boxed("box-c", 0.18, 0.07, 0.06),
                boxed("box-d", 0.15, 0.05, 0.07),
            ],
            orientations: (0..7).map(|k| k as f64 * 2.0 * PI / 7.0).collect(),
        }],
        jitter: 0.005,
        lambda: crate::alignment::DEFAULT_LAMBDA,
    };
    let seed_box = SceneObject::resting("box", "box-a", ObjectShape::Box { l: 0.16, w: 0.06, h: 0.06 }, -0.17, 0.0, 0.0, ws.table_z);
    let top = ws.table_z + 0.06;
    let (l0, r0) = home_states(&ws);

    let mut s = super::DemoScript::new(l0, r0, 0.1);
    s.move_arm(Arm::Left, pose(-0.17, 0.0, top + 0.19, tool_down(0.0)))
        .pause(1.0)
        .move_arm(Arm::Left, pose(-0.17, 0.0, top - 0.02, tool_down(0.0)))
        .pause(0.5)
        .gripper(Arm::Left, Gripper::Closed)
        .pause(0.5)
        .move_arm(Arm::Left, pose(-0.17, 0.0, top + 0.14, tool_down(0.0)))
        .pause(1.0)
        .move_arm(Arm::Left, pose(-0.12, 0.20, top + 0.14, tool_down(FRAC_PI_2)))
        .pause(1.0)
        .move_arm(Arm::Left, pose(-0.12, 0.20, top - 0.018, tool_down(FRAC_PI_2)))
        .pause(0.5)
        .gripper(Arm::Left, Gripper::Open)
        .pause(0.5)
        .move_arm(Arm::Left, pose(-0.12, 0.20, top + 0.16, tool_down(FRAC_PI_2)))
        .pause(1.0)
        .move_arm(Arm::Right, pose(0.15, -0.15, 0.2, tool_down(PI)))
        .pause(1.0)
        .move_to(Some(l0.pose), Some(r0.pose));

    let seed_scene = alloc::vec![seed_box];
    let demo = s
        .into_demonstration("reorient-seed", observe_seed(&ws, &seed_scene), ws.arm_bases())
        .expect("scripted demo is well formed");
    let mut overrides = BTreeMap::new();
    overrides.insert(
        2,
        KindOverride::Variable {
            object: "box".into(),
            arm: Some(Arm::Left),
        },
    );
    TaskFixture {
        workspace: ws,
        spec,
        demo,
        overrides,
        seed_scene,
    }
}

/// Two-role pouring: the left arm picks a bottle from the left half, the
/// right arm a cup from the right half, both meet near the center and the
/// bottle is tilted over the cup. (2 × 18) × (2 × 18) scenes.
///
/// Blocks of the seed: 0 left transit, 1 bottle grasp (variable), 2 bottle
/// lift (variable by override), 3 right transit, 4 cup grasp (variable),
/// 5 cup lift (variable by override), 6 meet, 7 tilt, 8 untilt, 9 retreat.
pub fn pour_fixture() -> TaskFixture {
    let ws = WorkspaceSpec::default();
    let spec = TaskSpec {
        name: "pour".into(),
        workspace: ws.rect(),
        table_z: ws.table_z,
        roles: alloc::vec![
            RoleSpec {
                object_id: "bottle".into(),
                region: Region::LeftHalf,
                rows: 3,
                cols: 6,
                instances: alloc::vec![cylinder("bottle-a", 0.03, 0.14), cylinder("bottle-b", 0.035, 0.12)],
                orientations: alloc::vec![0.0],
            },
            RoleSpec {
                object_id: "cup".into(),
                region: Region::RightHalf,
                rows: 3,
                cols: 6,
                instances: alloc::vec![cylinder("cup-a", 0.04, 0.08), cylinder("cup-b", 0.045, 0.07)],
                orientations: alloc::vec![0.0],
            },
        ],
        jitter: 0.005,
        lambda: crate::alignment::DEFAULT_LAMBDA,
    };
    let bottle = SceneObject::resting("bottle", "bottle-a", ObjectShape::Cylinder { radius: 0.03, height: 0.14 }, -0.17, 0.05, 0.0, ws.table_z);
    let cup = SceneObject::resting("cup", "cup-a", ObjectShape::Cylinder { radius: 0.04, height: 0.08 }, 0.17, -0.05, 0.0, ws.table_z);
    let (l0, r0) = home_states(&ws);
    let b_top = ws.table_z + 0.14;
    let c_top = ws.table_z + 0.08;
    let tilt = Rotation::from_axis_angle(Vec3::Y, -PI / 3.0).compose(&tool_down(0.0));

    let mut s = super::DemoScript::new(l0, r0, 0.1);
    s.move_arm(Arm::Left, pose(-0.17, 0.05, b_top + 0.14, tool_down(0.0)))
        .pause(1.0)
        .move_arm(Arm::Left, pose(-0.17, 0.05, b_top - 0.02, tool_down(0.0)))
        .pause(0.5)
        .gripper(Arm::Left, Gripper::Closed)
        .pause(0.5)
        .move_arm(Arm::Left, pose(-0.17, 0.05, b_top + 0.14, tool_down(0.0)))
        .pause(1.0)
        .move_arm(Arm::Right, pose(0.17, -0.05, c_top + 0.16, tool_down(PI)))
        .pause(1.0)
        .move_arm(Arm::Right, pose(0.17, -0.05, c_top - 0.02, tool_down(PI)))
        .pause(0.5)
        .gripper(Arm::Right, Gripper::Closed)
        .pause(0.5)
        .move_arm(Arm::Right, pose(0.17, -0.05, c_top + 0.12, tool_down(PI)))
        .pause(1.0)
        .move_to(
            Some(pose(-0.13, 0.0, 0.38, tool_down(0.0))),
            Some(pose(0.10, 0.0, 0.18, tool_down(PI))),
        )
        .pause(1.0)
        .move_arm(Arm::Left, pose(-0.13, 0.0, 0.38, tilt))
        .pause(1.0)
        .move_arm(Arm::Left, pose(-0.13, 0.0, 0.38, tool_down(0.0)))
        .pause(1.0)
        .move_to(
            Some(pose(-0.2, 0.12, 0.38, tool_down(0.0))),
            Some(pose(0.2, -0.12, 0.3, tool_down(PI))),
        );

    let seed_scene = alloc::vec![bottle, cup];
    let demo = s
        .into_demonstration("pour-seed", observe_seed(&ws, &seed_scene), ws.arm_bases())
        .expect("scripted demo is well formed");
    let mut overrides = BTreeMap::new();
    overrides.insert(
        2,
        KindOverride::Variable {
            object: "bottle".into(),
            arm: Some(Arm::Left),
        },
    );
    overrides.insert(
        5,
        KindOverride::Variable {
            object: "cup".into(),
            arm: Some(Arm::Right),
        },
    );
    TaskFixture {
        workspace: ws,
        spec,
        demo,
        overrides,
        seed_scene,
    }
}

/// Both arms resting at home for three seconds.
pub fn static_demo() -> Demonstration {
    let ws = WorkspaceSpec::default();
    let (l0, r0) = home_states(&ws);
    let mut s = super::DemoScript::new(l0, r0, 0.1);
    s.pause(3.0);
    s.into_demonstration("static", BTreeMap::new(), ws.arm_bases())
        .expect("static demo is well formed")
}
