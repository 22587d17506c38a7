use std::f64::consts::FRAC_PI_2;

use demosyn_core::alignment::{adapt_block, adapt_grasp, object_delta, offset_endpoint, AlignmentDelta};
use demosyn_core::demonstration::{Aep, AepTrigger, Arm, ArmBases, ArmState, Block, BlockCategory, BlockKind, Gripper};
use demosyn_core::geometry::{RigidPose, Rotation, Vec3};
use demosyn_core::perception::BoxDims;
use proptest::prelude::*;

fn rotation() -> impl Strategy<Value = Rotation> {
    (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
        .prop_filter("non-degenerate quaternion", |(w, x, y, z)| w * w + x * x + y * y + z * z > 0.01)
        .prop_map(|(w, x, y, z)| Rotation::from_quaternion(w, x, y, z).unwrap())
}

fn pose() -> impl Strategy<Value = RigidPose> {
    (rotation(), -1.0f64..1.0, -1.0f64..1.0, -0.5f64..1.0).prop_map(|(r, x, y, z)| RigidPose::new(r, Vec3::new(x, y, z)))
}

fn dims() -> BoxDims {
    BoxDims::new(0.1, 0.05, 0.05)
}

fn close(a: &RigidPose, b: &RigidPose, tol: f64) -> bool {
    let (dt, da) = a.error_to(b);
    dt <= tol && da <= tol
}

fn bases() -> ArmBases {
    ArmBases {
        left: RigidPose::new(Rotation::IDENTITY, Vec3::new(0.0, 0.55, 0.0)),
        right: RigidPose::new(Rotation::from_yaw(std::f64::consts::PI), Vec3::new(0.0, -0.55, 0.0)),
    }
}

fn variable_block(bound_arm: Option<Arm>) -> Block {
    Block {
        start: 0,
        end: 10,
        category: BlockCategory::DualArm,
        kind: Some(BlockKind::Variable),
        ambiguous: false,
        bound_object: Some("cube".into()),
        bound_arm,
    }
}

/// A chain of AEPs whose endpoints coincide with their successor's start.
fn chain(arm: Arm, poses: &[RigidPose]) -> Vec<Aep> {
    poses
        .windows(2)
        .enumerate()
        .map(|(i, w)| Aep {
            arm,
            start_index: i,
            end_index: i + 1,
            start_state: ArmState::new(w[0], Gripper::Open),
            end_state: ArmState::new(w[1], if i % 2 == 0 { Gripper::Open } else { Gripper::Closed }),
            duration: 0.5,
            trigger: AepTrigger::Distance,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    /// The grasp-to-object relative pose survives alignment.
    #[test]
    fn grasp_relative_pose_preserved(p_demo in pose(), p_obj in pose(), p_grasp in pose()) {
        let d = object_delta(&p_demo, &p_obj, dims(), dims(), 0.9);
        let adapted = adapt_grasp(&d, &p_grasp);
        let lhs = p_obj.inverse().compose(&adapted);
        let rhs = p_demo.inverse().compose(&p_grasp);
        prop_assert!(close(&lhs, &rhs, 1e-9));
    }

    #[test]
    fn delta_maps_seed_onto_novel(p in pose(), q in pose()) {
        let d = object_delta(&p, &q, dims(), dims(), 0.9);
        prop_assert!(close(&d.transform.compose(&p), &q, 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2_000))]

    #[test]
    fn deltas_compose(p in pose(), q in pose(), r in pose()) {
        let pq = object_delta(&p, &q, dims(), dims(), 0.9).transform;
        let qr = object_delta(&q, &r, dims(), dims(), 0.9).transform;
        let pr = object_delta(&p, &r, dims(), dims(), 0.9).transform;
        prop_assert!(close(&qr.compose(&pq), &pr, 1e-9));
    }

    /// A further world motion applied to the object moves the grasp the same way.
    #[test]
    fn grasp_is_equivariant(p_demo in pose(), p_obj in pose(), p_grasp in pose(), world in pose()) {
        let a = adapt_grasp(&object_delta(&p_demo, &p_obj, dims(), dims(), 0.9), &p_grasp);
        let moved = world.compose(&p_obj);
        let b = adapt_grasp(&object_delta(&p_demo, &moved, dims(), dims(), 0.9), &p_grasp);
        prop_assert!(close(&world.compose(&a), &b, 1e-9));
    }

    #[test]
    fn adapt_block_is_an_isometry(p_demo in pose(), p_obj in pose(), waypoints in prop::collection::vec(pose(), 3..8)) {
        let local: Vec<RigidPose> = waypoints.iter().map(|w| RigidPose::new(w.rotation, w.translation * 0.3)).collect();
        let aeps = chain(Arm::Left, &local);
        let d = object_delta(&p_demo, &p_obj, dims(), dims(), 0.9);
        let out = adapt_block(&variable_block(None), &aeps, &d, &p_obj.rotation, &bases());
        prop_assert_eq!(out.len(), aeps.len());
        let ends = |v: &[Aep]| -> Vec<Vec3> {
            let mut e = vec![v[0].start_state.pose.translation];
            e.extend(v.iter().map(|a| a.end_state.pose.translation));
            e
        };
        let (before, after) = (ends(&aeps), ends(&out));
        for i in 0..before.len() {
            for j in i + 1..before.len() {
                let d0 = before[i].distance(before[j]);
                let d1 = after[i].distance(after[j]);
                prop_assert!((d0 - d1).abs() <= 1e-9, "pair ({i},{j}): {d0} vs {d1}");
            }
        }
        // Chaining survives, and so do gripper states.
        for (w, a) in out.windows(2).zip(aeps.iter()) {
            prop_assert_eq!(w[0].end_state.pose, w[1].start_state.pose);
            prop_assert_eq!(w[0].end_state.gripper, a.end_state.gripper);
        }
    }

    #[test]
    fn unbound_arm_passes_through(p_demo in pose(), p_obj in pose(), waypoints in prop::collection::vec(pose(), 2..5)) {
        let aeps = chain(Arm::Right, &waypoints);
        let d = object_delta(&p_demo, &p_obj, dims(), BoxDims::new(0.12, 0.05, 0.06), 0.9);
        let out = adapt_block(&variable_block(Some(Arm::Left)), &aeps, &d, &p_obj.rotation, &bases());
        prop_assert_eq!(out, aeps);
    }
}

#[test]
fn identity_delta_is_exact() {
    let p = RigidPose::new(Rotation::from_yaw(0.7), Vec3::new(0.1, -0.2, 0.025));
    let d = object_delta(&p, &p, dims(), dims(), 0.9);
    assert!(d.is_identity());
    let aeps = chain(Arm::Left, &[p, RigidPose::IDENTITY, p.inverse()]);
    assert_eq!(adapt_block(&variable_block(None), &aeps, &d, &p.rotation, &bases()), aeps);
}

#[test]
fn translated_object_translates_grasp() {
    let p = RigidPose::new(Rotation::from_yaw(0.4), Vec3::new(0.1, 0.0, 0.0));
    let q = RigidPose::new(p.rotation, p.translation + Vec3::new(0.0, 0.2, 0.0));
    let d = object_delta(&p, &q, dims(), dims(), 0.9);
    assert!(d.transform.rotation.angle() < 1e-15);
    assert!(d.transform.translation.distance(Vec3::new(0.0, 0.2, 0.0)) < 1e-15);
    let g = RigidPose::new(Rotation::from_yaw(-1.0), Vec3::new(0.3, 0.1, 0.2));
    let a = adapt_grasp(&d, &g);
    assert!(a.translation.distance(g.translation + Vec3::new(0.0, 0.2, 0.0)) < 1e-15);
    assert!(a.rotation.angle_to(&g.rotation) < 1e-12);
}

/// Object yawed a quarter turn in place: a grasp 0.1 m ahead along the object's
/// +x ends up 0.1 m along world +y, turned by the same quarter turn.
#[test]
fn quarter_turn_about_object_center() {
    let c = Vec3::new(0.2, -0.1, 0.0);
    let p = RigidPose::from_translation(c);
    let q = RigidPose::new(Rotation::from_yaw(FRAC_PI_2), c);
    let g = RigidPose::from_translation(c + Vec3::new(0.1, 0.0, 0.0));
    let a = adapt_grasp(&object_delta(&p, &q, dims(), dims(), 0.9), &g);
    assert!(a.translation.distance(c + Vec3::new(0.0, 0.1, 0.0)) < 1e-15);
    assert!((a.rotation.yaw() - FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn size_offset_in_object_frame() {
    let s = ArmState::new(RigidPose::from_translation(Vec3::new(0.1, 0.1, 0.1)), Gripper::Closed);
    let d = AlignmentDelta {
        transform: RigidPose::IDENTITY,
        size_offset: Vec3::new(0.0, 0.0, 0.02),
        lambda: 1.0,
    };
    let out = offset_endpoint(&s, &d, &Rotation::IDENTITY);
    assert!((out.pose.translation.z - 0.12).abs() < 1e-15);
    assert_eq!(out.gripper, Gripper::Closed);

    let d = AlignmentDelta {
        size_offset: Vec3::new(0.05, 0.0, 0.0),
        lambda: 0.8,
        ..d
    };
    let out = offset_endpoint(&s, &d, &Rotation::from_yaw(FRAC_PI_2));
    assert!(out.pose.translation.distance(Vec3::new(0.1, 0.14, 0.1)) < 1e-15);
    assert_eq!(out.pose.rotation, s.pose.rotation);
}
