//! Acceptance run. Every criterion prints one `PASS` or `FAIL` line to
//! stderr (uncaptured, so the lines appear even when the test passes); the
//! test fails if any criterion does.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use clap::Parser;
use demosyn::checks::{diffusion_checks, DiffusionCheckConfig};
use demosyn::cli::{run, Cli};
use demosyn::dataset::load_manifest;
use demosyn_core::alignment::{adapt_grasp, object_delta};
use demosyn_core::demonstration::{refine_to_aeps, segment_blocks, ArmBases, BlockCategory, Demonstration, SegmentationParams};
use demosyn_core::diffusion::cosine_schedule;
use demosyn_core::geometry::{RigidPose, Rotation, Vec3};
use demosyn_core::harness::{
    add_position_noise, pour_fixture, random_script, render_objects, reorient_fixture, yaw_error_mod_pi, WorkspaceSpec,
};
use demosyn_core::kinematics::{
    arm_capsules, config_in_collision, inverse_kinematics, reference_arm, Aabb, ArmModel, Capsule, CollisionScene,
    IkParams, JointConfig, Obb, TABLE_EXEMPT_CAPSULES,
};
use demosyn_core::perception::{estimate_pose, BoxDims, PerceptionError, PerceptionParams};
use demosyn_core::synthesis::{
    enumerate_scenes, synthesize_dataset, synthesize_one, DatasetContext, DatasetStats, MemorySink, ObjectSource,
    Outcome, PreparedDemo, SynthesisConfig,
};
use demosyn_core::synthesis::{ObjectShape, SceneObject};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn enumeration() -> Verdict {
    let (reorient, pour) = (reorient_fixture(), pour_fixture());
    let t0 = Instant::now();
    let a = enumerate_scenes(&reorient.spec, 0).len();
    let b = enumerate_scenes(&pour.spec, 0).len();
    let dt = t0.elapsed().as_secs_f64();
    check(a == 1008 && b == 1296 && dt < 1.0, format!("{a} and {b} scenes in {:.1} ms", dt * 1e3))
}

/// Single-threaded ground-truth run over all 1008 reorient scenes.
fn ground_truth_run() -> (DatasetStats, f64) {
    let fix = reorient_fixture();
    let config = SynthesisConfig::default();
    let prepared = PreparedDemo::new(fix.demo.clone(), &config, &fix.overrides).unwrap();
    let (arms, cam) = (fix.workspace.arms(), fix.workspace.camera());
    let ctx = DatasetContext {
        prepared: &prepared,
        spec: &fix.spec,
        master_seed: 0,
        arms: &arms,
        camera: &cam,
        config: &config,
    };
    let t0 = Instant::now();
    let stats = synthesize_dataset(&ctx, &mut MemorySink::default()).unwrap();
    (stats, t0.elapsed().as_secs_f64())
}

fn pass_rate(stats: &DatasetStats, secs: f64) -> Verdict {
    let rate = stats.pass_rate();
    check(
        rate >= 0.90 && secs <= 60.0,
        format!(
            "{}/{} passed ({:.2}%; ik {}, collision {}, perception {}) in {secs:.2} s",
            stats.passes,
            stats.attempts,
            100.0 * rate,
            stats.reject_ik,
            stats.reject_collision,
            stats.reject_perception
        ),
    )
}

fn throughput(stats: &DatasetStats, secs: f64) -> Verdict {
    check(
        stats.attempts >= 1000 && secs <= 60.0,
        format!("{} attempts in {secs:.2} s on one thread ({:.0} attempts/s)", stats.attempts, stats.attempts as f64 / secs),
    )
}

fn random_pose<R: Rng>(rng: &mut R) -> RigidPose {
    let q = loop {
        let q: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        if q.iter().map(|v| v * v).sum::<f64>() > 0.01 {
            break q;
        }
    };
    let rot = Rotation::from_quaternion(q[0], q[1], q[2], q[3]).unwrap();
    RigidPose::new(rot, Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..1.0)))
}

fn alignment_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dims = BoxDims::new(0.1, 0.05, 0.05);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (p_demo, p_obj, p_grasp) = (random_pose(&mut rng), random_pose(&mut rng), random_pose(&mut rng));
        let adapted = adapt_grasp(&object_delta(&p_demo, &p_obj, dims, dims, 0.9), &p_grasp);
        let (dt, da) = p_obj.inverse().compose(&adapted).error_to(&p_demo.inverse().compose(&p_grasp));
        worst = worst.max(dt).max(da);
    }
    let mut identical = true;
    for fix in [reorient_fixture(), pour_fixture()] {
        let config = SynthesisConfig::default();
        let prepared = PreparedDemo::new(fix.demo.clone(), &config, &fix.overrides).unwrap();
        let r = synthesize_one(
            &prepared,
            &fix.seed_instance(),
            ObjectSource::GroundTruth,
            &fix.workspace.arms(),
            fix.spec.table_z,
            &config,
        );
        // Debug output distinguishes every bit pattern, including signed zeros.
        identical &= r
            .trajectory
            .is_some_and(|t| format!("{:?}", t.keyposes) == format!("{:?}", prepared.seed_keyposes()));
    }
    check(
        worst <= 1e-9 && identical,
        format!("worst relative-pose error {worst:.2e} over 10^4 triples; identity scenes byte-identical: {identical}"),
    )
}

fn perception_oracle() -> Verdict {
    let ws = WorkspaceSpec::default();
    let cam = ws.camera();
    let params = PerceptionParams::default();
    let rect = ws.rect();
    let cells: Vec<(f64, f64)> = (0..36)
        .map(|k| {
            let (r, c) = (k / 6, k % 6);
            (rect.x_min + (c as f64 + 0.5) * rect.size_x() / 6.0, rect.y_min + (r as f64 + 0.5) * rect.size_y() / 6.0)
        })
        .collect();
    let shape = ObjectShape::Box { l: 0.10, w: 0.05, h: 0.05 };
    let mut worst = (0.0f64, 0.0f64);
    let mut failures = 0;
    for &(x, y) in &cells {
        for deg in 0..360 {
            let yaw = (deg as f64).to_radians();
            let obj = SceneObject::resting("box", "box", shape, x, y, yaw, 0.0);
            let est = render_objects(&[&obj], &cam, 0.0)
                .ok()
                .and_then(|obs| obs.view("box").and_then(|(m, d)| estimate_pose(m, d, &cam, &params).ok()));
            let Some(est) = est else {
                failures += 1;
                continue;
            };
            let dyaw = yaw_error_mod_pi(est.pose.rotation.yaw(), yaw).to_degrees();
            let dpos = est.pose.translation.distance(Vec3::new(x, y, 0.05));
            worst = (worst.0.max(dyaw), worst.1.max(dpos));
        }
    }
    let mut degenerate = 0;
    let mut circles = 0;
    for &(x, y) in &cells {
        for (radius, height) in [(0.03, 0.12), (0.045, 0.07)] {
            let obj = SceneObject::resting("can", "can", ObjectShape::Cylinder { radius, height }, x, y, 0.0, 0.0);
            let obs = render_objects(&[&obj], &cam, 0.0).unwrap();
            let (m, d) = obs.view("can").unwrap();
            circles += 1;
            degenerate += usize::from(matches!(estimate_pose(m, d, &cam, &params), Err(PerceptionError::DegenerateCloud { .. })));
        }
    }
    let mm_per_px = 1e3 * (cam.extrinsic.translation.z - 0.05) / cam.fx;
    check(
        worst.0 <= 1.0 && worst.1 <= 0.002 && failures == 0 && degenerate == circles,
        format!(
            "12960 renders at {mm_per_px:.2} mm/px: worst yaw {:.3} deg, worst position {:.3} mm, {failures} failed; {degenerate}/{circles} circular masks degenerate",
            worst.0,
            worst.1 * 1e3
        ),
    )
}

fn decomposition_oracle() -> Verdict {
    let params = SegmentationParams::default();
    let amplitude = 0.45 * params.zeta;
    let bases = ArmBases {
        left: RigidPose::IDENTITY,
        right: RigidPose::IDENTITY,
    };
    let (mut bad_bounds, mut bad_cats, mut bad_chains) = (0, 0, 0);
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let truth = random_script(&mut rng, 0.1).finish(&params);
        let mut samples = truth.samples.clone();
        add_position_noise(&mut samples, amplitude, &mut rng);
        let demo = Demonstration::new("scripted", samples, BTreeMap::new(), bases).unwrap();
        let blocks = segment_blocks(&demo, &params).unwrap();
        let got: Vec<usize> = blocks.iter().skip(1).map(|b| b.start).collect();
        if got.len() != truth.boundaries.len() || got.iter().zip(&truth.boundaries).any(|(g, e)| g.abs_diff(*e) > 1) {
            bad_bounds += 1;
        }
        if blocks.iter().map(|b| b.category).collect::<Vec<_>>() != truth.categories {
            bad_cats += 1;
        }
        let s = demo.samples();
        for b in &blocks {
            let aeps = refine_to_aeps(b, &demo, &params);
            if b.category == BlockCategory::Static {
                continue;
            }
            let terminal = demo.terminal_index(b.end);
            for &arm in b.category.moving_arms() {
                let chain: Vec<_> = aeps.iter().filter(|a| a.arm == arm).collect();
                let ok = !chain.is_empty()
                    && chain[0].start_state == *s[b.start].arm(arm)
                    && chain.last().unwrap().end_state == *s[terminal].arm(arm)
                    && chain.windows(2).all(|w| w[0].end_index == w[1].start_index && w[0].end_state == w[1].start_state);
                bad_chains += usize::from(!ok);
            }
        }
    }
    check(
        bad_bounds == 0 && bad_cats == 0 && bad_chains == 0,
        format!("100 scripted demos at noise 0.45 zeta: {bad_bounds} boundary, {bad_cats} category, {bad_chains} chaining mismatches"),
    )
}

fn random_q<R: Rng>(rng: &mut R, arm: &ArmModel) -> JointConfig {
    JointConfig(std::array::from_fn(|i| rng.random_range(arm.limits[i].0..arm.limits[i].1)))
}

/// Dense-sampling oracle: clamp distance to each box along 400 samples per
/// capsule axis with ternary refinement; negative means contact.
fn oracle_margin(capsules: &[Capsule], obstacles: &[Obb], table_z: f64) -> f64 {
    let box_distance = |o: &Obb, p: Vec3| {
        let l = o.pose.inverse().transform_point(p);
        let c = Vec3::new(l.x.clamp(-o.half.x, o.half.x), l.y.clamp(-o.half.y, o.half.y), l.z.clamp(-o.half.z, o.half.z));
        l.distance(c)
    };
    let mut m = f64::INFINITY;
    for (k, c) in capsules.iter().enumerate() {
        if k >= TABLE_EXEMPT_CAPSULES {
            m = m.min(c.a.z.min(c.b.z) - c.radius - table_z);
        }
        for o in obstacles {
            const N: usize = 400;
            let f = |t: f64| box_distance(o, c.a.lerp(c.b, t));
            let best = (0..=N).min_by(|&i, &j| f(i as f64 / N as f64).total_cmp(&f(j as f64 / N as f64))).unwrap();
            let (mut lo, mut hi) = (best.saturating_sub(1) as f64 / N as f64, (best + 1).min(N) as f64 / N as f64);
            for _ in 0..100 {
                let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
                if f(m1) <= f(m2) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            m = m.min(f(0.5 * (lo + hi)).min(f(0.0)).min(f(1.0)) - c.radius);
        }
    }
    m
}

fn kinematics_suite() -> Verdict {
    let arm = reference_arm(RigidPose::new(Rotation::from_yaw(-0.4), Vec3::new(-0.55, 0.05, 0.0)));
    let params = IkParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (mut worst, mut ik_fail) = ((0.0f64, 0.0f64), 0);
    for _ in 0..1000 {
        let target = arm.forward_kinematics(&random_q(&mut rng, &arm));
        match inverse_kinematics(&arm, &target, &arm.home, &params) {
            Ok(sol) => {
                let (dp, da) = arm.forward_kinematics(&sol.q).error_to(&target);
                worst = (worst.0.max(dp), worst.1.max(da));
            }
            Err(_) => ik_fail += 1,
        }
    }
    let mut accepted_far = 0;
    for _ in 0..1000 {
        let dir = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            .normalized()
            .unwrap_or(Vec3::X);
        let p = arm.base.translation + dir * (arm.reach_radius() * rng.random_range(1.0001..3.0));
        let target = RigidPose::new(Rotation::from_yaw(rng.random_range(-PI..PI)), p);
        accepted_far += usize::from(inverse_kinematics(&arm, &target, &arm.home, &params).is_ok());
    }
    let ws = Aabb {
        min: Vec3::new(-3.0, -3.0, -1.0),
        max: Vec3::new(3.0, 3.0, 3.0),
    };
    let (mut disagree, mut hits, mut ties) = (0, 0, 0);
    for _ in 0..1000 {
        let q = random_q(&mut rng, &arm);
        let table_z = rng.random_range(-0.2..0.0);
        let mut scene = CollisionScene::new(table_z, ws);
        let obstacles: Vec<Obb> = (0..rng.random_range(1..4))
            .map(|_| {
                let axis = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0).normalized().unwrap();
                let c = arm.base.translation
                    + Vec3::new(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7), rng.random_range(0.0..0.7));
                let half = Vec3::new(rng.random_range(0.02..0.15), rng.random_range(0.02..0.15), rng.random_range(0.02..0.15));
                Obb::new(RigidPose::new(Rotation::from_axis_angle(axis, rng.random_range(-PI..PI)), c), half)
            })
            .collect();
        for (k, o) in obstacles.iter().enumerate() {
            scene.add_object(format!("o{k}"), *o).unwrap();
        }
        let margin = oracle_margin(&arm_capsules(&arm, &q), &obstacles, table_z);
        if margin.abs() < 1e-9 {
            ties += 1;
            continue;
        }
        let got = config_in_collision(&arm, &q, &scene, &[]);
        disagree += usize::from(got != (margin < 0.0));
        hits += usize::from(got);
    }
    check(
        ik_fail == 0 && worst.0 <= 1e-6 && worst.1 <= 1e-6 && accepted_far == 0 && disagree == 0 && ties == 0,
        format!(
            "round trips: {ik_fail} failures, worst {:.2e} m / {:.2e} rad; {accepted_far}/1000 out-of-reach accepted; collision: {disagree} disagreements over 1000 scenes ({hits} in contact)",
            worst.0, worst.1
        ),
    )
}

fn diffusion_suite() -> Verdict {
    let lines = diffusion_checks(&DiffusionCheckConfig {
        rho: 0.5,
        draws: 100_000,
        ..DiffusionCheckConfig::default()
    });
    // Cosine-schedule values from an independent 40-digit evaluation.
    let s = cosine_schedule(100, 0.008).unwrap();
    let fixture_ok = [(1, 0.999_368_718_401_658_5), (50, 0.493_843_590_440_637_7), (99, 2.428_572_279_350_056_3e-4)]
        .iter()
        .all(|&(k, want)| (s.alpha_bar(k).unwrap() - want).abs() <= 1e-14 * f64::max(want, 1e-3));
    let failed: Vec<&str> = lines.iter().filter(|l| !l.passed).map(|l| l.name).collect();
    let detail = lines.iter().map(|l| format!("{} [{}]", l.name, l.detail)).collect::<Vec<_>>().join("; ");
    check(failed.is_empty() && fixture_ok, format!("schedule fixtures match: {fixture_ok}; {detail}"))
}

fn determinism() -> Verdict {
    let dir = TempDir::new().unwrap();
    let fixtures = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let mut digests = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let cli = Cli::try_parse_from([
            "demosyn",
            "synthesize",
            "--task",
            &format!("{fixtures}/reorient.task.json"),
            "--demo",
            &format!("{fixtures}/reorient.demo.json"),
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ])
        .unwrap();
        let code = run(&cli, &mut Vec::new(), &mut Vec::new());
        if code != 0 {
            return Err(format!("synthesize exited with {code}"));
        }
        digests.push(load_manifest(&out).unwrap().digest);
    }
    check(digests[0] == digests[1], format!("manifest digests {} and {}", digests[0], digests[1]))
}

#[test]
fn acceptance_criteria() {
    let report = |n: usize, name: &str, v: &Verdict| {
        let (tag, detail) = match v {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let _ = writeln!(std::io::stderr().lock(), "{tag} criterion {n} {name}: {detail}");
    };
    let mut verdicts = Vec::new();
    let mut record = |n: usize, name: &str, v: Verdict| {
        report(n, name, &v);
        verdicts.push((n, v.is_ok()));
    };
    record(1, "enumeration", enumeration());
    let (stats, secs) = ground_truth_run();
    record(2, "validation pass rate", pass_rate(&stats, secs));
    record(3, "throughput", throughput(&stats, secs));
    record(4, "alignment identity", alignment_identity());
    record(5, "perception oracle", perception_oracle());
    record(6, "decomposition oracle", decomposition_oracle());
    record(7, "kinematics", kinematics_suite());
    record(8, "diffusion numerics", diffusion_suite());
    record(9, "determinism", determinism());
    let failed: Vec<usize> = verdicts.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

#[test]
fn reject_outcomes_are_exhaustive() {
    // Every outcome maps to exactly one counter.
    let labels: Vec<&str> = [
        Outcome::Pass,
        Outcome::RejectIk { block: 0 },
        Outcome::RejectCollision { block: 0 },
        Outcome::RejectPerception { object: String::new() },
    ]
    .iter()
    .map(Outcome::label)
    .collect();
    assert_eq!(labels, ["pass", "reject_ik", "reject_collision", "reject_perception"]);
}
