use std::f64::consts::PI;

use demosyn_core::geometry::{RigidPose, Rotation, Vec3};
use demosyn_core::kinematics::{
    arm_capsules, config_in_collision, inverse_kinematics, path_collision_free, reference_arm, Aabb, ArmModel, Capsule,
    CollisionScene, IkParams, JointConfig, Obb, DEFAULT_PATH_RESOLUTION, TABLE_EXEMPT_CAPSULES,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arm() -> ArmModel {
    reference_arm(RigidPose::new(Rotation::from_yaw(0.3), Vec3::new(0.1, 0.55, 0.0)))
}

fn random_q<R: Rng>(rng: &mut R, arm: &ArmModel) -> JointConfig {
    let mut q = [0.0; 6];
    for (v, (lo, hi)) in q.iter_mut().zip(arm.limits) {
        *v = rng.random_range(lo..hi);
    }
    JointConfig(q)
}

fn workspace() -> Aabb {
    Aabb {
        min: Vec3::new(-2.0, -2.0, -0.1),
        max: Vec3::new(2.0, 2.0, 2.0),
    }
}

#[test]
fn fk_ik_fk_round_trip() {
    let arm = arm();
    let params = IkParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let target = arm.forward_kinematics(&random_q(&mut rng, &arm));
        let sol = inverse_kinematics(&arm, &target, &arm.home, &params)
            .unwrap_or_else(|e| panic!("trial {i}: reachable target rejected: {e:?}"));
        assert!(arm.within_limits(&sol.q));
        let (dp, da) = arm.forward_kinematics(&sol.q).error_to(&target);
        assert!(dp <= 1e-6 && da <= 1e-6, "trial {i}: {dp:e} m, {da:e} rad");
        worst = (worst.0.max(dp), worst.1.max(da));
    }
    eprintln!("worst residual {:.2e} m {:.2e} rad", worst.0, worst.1);
}

#[test]
fn targets_beyond_reach_are_rejected() {
    let arm = arm();
    let params = IkParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let r = arm.reach_radius();
    for _ in 0..1000 {
        let dir = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            .normalized()
            .unwrap_or(Vec3::X);
        let p = arm.base.translation + dir * (r * rng.random_range(1.0001..3.0));
        let target = RigidPose::new(Rotation::from_yaw(rng.random_range(-PI..PI)), p);
        let err = inverse_kinematics(&arm, &target, &arm.home, &params).unwrap_err();
        assert!(err.beyond_reach);
    }
}

/// Independent point-to-box distance: clamp in the box frame.
fn box_distance(obb: &Obb, p: Vec3) -> f64 {
    let l = obb.pose.inverse().transform_point(p);
    let c = Vec3::new(
        l.x.clamp(-obb.half.x, obb.half.x),
        l.y.clamp(-obb.half.y, obb.half.y),
        l.z.clamp(-obb.half.z, obb.half.z),
    );
    l.distance(c)
}

/// Minimum of the box distance along a segment. The distance to a convex set
/// is convex along a line, so a dense scan followed by ternary refinement
/// around the best sample finds the minimum.
fn segment_box_distance(obb: &Obb, a: Vec3, b: Vec3) -> f64 {
    const N: usize = 400;
    let f = |t: f64| box_distance(obb, a.lerp(b, t));
    let best = (0..=N).min_by(|&i, &j| f(i as f64 / N as f64).total_cmp(&f(j as f64 / N as f64))).unwrap();
    let (mut lo, mut hi) = ((best.saturating_sub(1)) as f64 / N as f64, ((best + 1).min(N)) as f64 / N as f64);
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0))
}

/// Signed margin of the dense oracle: negative means contact.
fn oracle_margin(capsules: &[Capsule], obstacles: &[Obb], table_z: f64) -> f64 {
    let mut m = f64::INFINITY;
    for (k, c) in capsules.iter().enumerate() {
        if k >= TABLE_EXEMPT_CAPSULES {
            m = m.min(c.a.z.min(c.b.z) - c.radius - table_z);
        }
        for o in obstacles {
            m = m.min(segment_box_distance(o, c.a, c.b) - c.radius);
        }
    }
    m
}

fn random_obb<R: Rng>(rng: &mut R, near: Vec3) -> Obb {
    let rot = Rotation::from_axis_angle(
        Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0).normalized().unwrap(),
        rng.random_range(-PI..PI),
    );
    let c = near + Vec3::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7), rng.random_range(0.0..0.7));
    Obb::new(
        RigidPose::new(rot, c),
        Vec3::new(rng.random_range(0.02..0.15), rng.random_range(0.02..0.15), rng.random_range(0.02..0.15)),
    )
}

/// Collision decisions against the dense oracle on 10³ random scenes. Ties
/// closer than 1e-9 to contact would be decided by rounding; none occur.
#[test]
fn collision_matches_dense_oracle() {
    let arm = arm();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut hits, mut misses, mut ties) = (0, 0, 0);
    for i in 0..1000 {
        let q = random_q(&mut rng, &arm);
        let table_z = rng.random_range(-0.2..0.0);
        let mut scene = CollisionScene::new(table_z, workspace());
        let obstacles: Vec<Obb> = (0..rng.random_range(1..4)).map(|_| random_obb(&mut rng, arm.base.translation)).collect();
        for (k, o) in obstacles.iter().enumerate() {
            scene.add_object(format!("o{k}"), *o).unwrap();
        }
        let margin = oracle_margin(&arm_capsules(&arm, &q), &obstacles, table_z);
        if margin.abs() < 1e-9 {
            ties += 1;
            continue;
        }
        let got = config_in_collision(&arm, &q, &scene, &[]);
        assert_eq!(got, margin < 0.0, "scene {i}: margin {margin:e}");
        if got {
            hits += 1;
        } else {
            misses += 1;
        }
    }
    assert_eq!(ties, 0);
    // Both outcomes must be well represented for the comparison to mean anything.
    assert!(hits > 100 && misses > 100, "hits {hits} misses {misses}");
}

#[test]
fn ignored_objects_do_not_collide() {
    let arm = arm();
    let q = arm.home;
    let tool = arm.forward_kinematics(&q).translation;
    let mut scene = CollisionScene::new(-1.0, workspace());
    scene.add_object("held", Obb::new(RigidPose::from_translation(tool), Vec3::new(0.03, 0.03, 0.03))).unwrap();
    assert!(config_in_collision(&arm, &q, &scene, &[]));
    assert!(!config_in_collision(&arm, &q, &scene, &["held"]));
}

#[test]
fn degenerate_obstacles_rejected() {
    let mut scene = CollisionScene::new(0.0, workspace());
    assert!(scene.add_object("flat", Obb::new(RigidPose::IDENTITY, Vec3::new(0.1, 0.1, 0.0))).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn zero_length_path_matches_config_check(seed in any::<u64>()) {
        let arm = arm();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_q(&mut rng, &arm);
        let mut scene = CollisionScene::new(-0.1, workspace());
        scene.add_object("o", random_obb(&mut rng, arm.base.translation)).unwrap();
        let free = path_collision_free(&arm, &q, &q, &scene, &[], DEFAULT_PATH_RESOLUTION).unwrap();
        prop_assert_eq!(free, !config_in_collision(&arm, &q, &scene, &[]));
    }

    /// Refining the resolution by an integer factor checks a superset of the
    /// configurations, so it can only find more contacts; adding an obstacle
    /// can only turn free paths into colliding ones.
    #[test]
    fn path_checks_are_monotone(seed in any::<u64>()) {
        let arm = arm();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q0 = random_q(&mut rng, &arm);
        let q1 = q0.lerp(&random_q(&mut rng, &arm), 0.3);
        let mut scene = CollisionScene::new(-0.5, workspace());
        scene.add_object("a", random_obb(&mut rng, arm.base.translation)).unwrap();
        let res = DEFAULT_PATH_RESOLUTION;
        let n = (q0.max_abs_diff(&q1) / res).ceil().max(1.0);
        let coarse_res = q0.max_abs_diff(&q1).max(1e-12) / n;
        let coarse = path_collision_free(&arm, &q0, &q1, &scene, &[], coarse_res * 1.000_000_1).unwrap();
        let fine = path_collision_free(&arm, &q0, &q1, &scene, &[], coarse_res / 8.0 * 1.000_000_1).unwrap();
        prop_assert!(!fine || coarse);

        let mut more = scene.clone();
        more.add_object("b", random_obb(&mut rng, arm.base.translation)).unwrap();
        let with_b = path_collision_free(&arm, &q0, &q1, &more, &[], res).unwrap();
        let without_b = path_collision_free(&arm, &q0, &q1, &scene, &[], res).unwrap();
        prop_assert!(!with_b || without_b);
    }

    #[test]
    fn capsules_form_a_chain(seed in any::<u64>()) {
        let arm = arm();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_q(&mut rng, &arm);
        let c = arm_capsules(&arm, &q);
        prop_assert!(c[0].a.distance(arm.base.translation) < 1e-12);
        for w in c[..12].windows(2) {
            prop_assert!(w[0].b.distance(w[1].a) < 1e-12);
        }
        prop_assert!(c[12].a.distance(c[11].b) < 1e-12);
    }
}

#[test]
fn path_rejects_limit_violations() {
    let arm = arm();
    let scene = CollisionScene::new(-1.0, workspace());
    let mut bad = arm.home;
    bad.0[0] = 10.0;
    assert!(path_collision_free(&arm, &arm.home, &bad, &scene, &[], DEFAULT_PATH_RESOLUTION).is_err());
}
