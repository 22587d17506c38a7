use std::collections::{BTreeMap, BTreeSet};

use demosyn_core::demonstration::Arm;
use demosyn_core::geometry::Vec3;
use demosyn_core::harness::{pour_fixture, reorient_fixture, render_observation, TaskFixture};
use demosyn_core::synthesis::{
    enumerate_scenes, scene_at, synthesize_dataset, synthesize_one, DatasetContext, DatasetStats, MemorySink,
    ObjectSource, Outcome, PreparedDemo, SceneInstance, SynthesisConfig, SynthesisMode,
};

fn prepare(fix: &TaskFixture) -> PreparedDemo {
    PreparedDemo::new(fix.demo.clone(), &SynthesisConfig::default(), &fix.overrides).unwrap()
}

/// The seed scene with the named object shifted.
fn shifted(fix: &TaskFixture, id: &str, by: Vec3) -> SceneInstance {
    let mut scene = fix.seed_instance();
    let obj = scene.objects.get_mut(id).unwrap();
    obj.pose.translation += by;
    scene
}

fn run_gt(fix: &TaskFixture, prepared: &PreparedDemo, scene: &SceneInstance) -> demosyn_core::synthesis::SceneResult {
    let arms = fix.workspace.arms();
    synthesize_one(prepared, scene, ObjectSource::GroundTruth, &arms, fix.spec.table_z, &SynthesisConfig::default())
}

#[test]
fn enumeration_counts() {
    assert_eq!(reorient_fixture().spec.scene_count(), 1008);
    assert_eq!(pour_fixture().spec.scene_count(), 1296);
}

/// Every (instance, orientation, cell) combination of every role appears
/// exactly once, matching a nested-loop count.
#[test]
fn enumeration_matches_brute_force() {
    for fix in [reorient_fixture(), pour_fixture()] {
        let spec = &fix.spec;
        let mut brute = 1usize;
        for role in &spec.roles {
            let mut n = 0;
            for _ in &role.instances {
                for _ in &role.orientations {
                    for _ in 0..role.rows * role.cols {
                        n += 1;
                    }
                }
            }
            brute *= n;
        }
        let scenes = enumerate_scenes(spec, 3);
        assert_eq!(scenes.len(), brute);
        let keys: BTreeSet<Vec<(String, u64, usize, usize)>> = scenes
            .iter()
            .map(|s| {
                s.objects
                    .iter()
                    .map(|(id, o)| {
                        let c = s.cells[id];
                        (o.instance_id.clone(), o.pose.rotation.yaw().to_bits(), c.row, c.col)
                    })
                    .collect()
            })
            .collect();
        assert_eq!(keys.len(), brute, "{}: duplicate scenes", spec.name);
        for (i, s) in scenes.iter().enumerate() {
            assert_eq!(s.index, i);
            assert_eq!(*s, scene_at(spec, 3, i));
            for o in s.objects.values() {
                assert!(spec.workspace.contains(o.pose.translation.x, o.pose.translation.y));
            }
        }
    }
}

#[test]
fn identity_scene_reproduces_seed_keyposes() {
    for fix in [reorient_fixture(), pour_fixture()] {
        let prepared = prepare(&fix);
        let r = run_gt(&fix, &prepared, &fix.seed_instance());
        assert_eq!(r.report.outcome, Outcome::Pass, "{}", fix.spec.name);
        let t = r.trajectory.unwrap();
        assert_eq!(t.keyposes, prepared.seed_keyposes());
        assert!(t.provenance.deltas.iter().all(|d| d.delta.is_identity()));
    }
}

/// A 10 cm shift of the box moves every variable-block endpoint of the
/// grasping arm by 10 cm and leaves the rest untouched.
#[test]
fn translated_object_shifts_variable_endpoints() {
    let fix = reorient_fixture();
    let prepared = prepare(&fix);
    let seed = prepared.seed_keyposes();
    let r = run_gt(&fix, &prepared, &shifted(&fix, "box", Vec3::new(0.0, 0.1, 0.0)));
    assert_eq!(r.report.outcome, Outcome::Pass);
    let kp = r.trajectory.unwrap().keyposes;
    assert_eq!(kp.len(), seed.len());
    let blocks = &prepared.decomposition.blocks;
    let mut moved = 0;
    for (a, b) in kp.iter().zip(&seed) {
        assert_eq!(a.block, b.block);
        if blocks[a.block].is_variable() {
            let d = a.sample.left.pose.translation.distance(b.sample.left.pose.translation);
            assert!((d - 0.1).abs() <= 1e-9, "block {}: moved {d}", a.block);
            assert!(a.sample.left.pose.rotation.angle_to(&b.sample.left.pose.rotation) <= 1e-12);
            assert_eq!(a.sample.right, b.sample.right);
            moved += 1;
        }
    }
    assert!(moved >= 2);
}

#[test]
fn unreachable_object_is_an_ik_reject() {
    let fix = reorient_fixture();
    let prepared = prepare(&fix);
    let r = run_gt(&fix, &prepared, &shifted(&fix, "box", Vec3::new(-2.0, 0.0, 0.0)));
    assert!(matches!(r.report.outcome, Outcome::RejectIk { block: 1 }), "{:?}", r.report.outcome);
    assert!(r.trajectory.is_none());
    assert!(!r.report.blocks[1].ik_ok);
}

#[test]
fn missing_object_is_a_perception_reject() {
    let fix = reorient_fixture();
    let prepared = prepare(&fix);
    let mut scene = fix.seed_instance();
    scene.objects.clear();
    let r = run_gt(&fix, &prepared, &scene);
    assert_eq!(r.report.outcome, Outcome::RejectPerception { object: "box".into() });
}

/// Keyposes of invariant blocks are the seed's, bit for bit, in every
/// passing scene.
#[test]
fn invariant_blocks_are_reused_verbatim() {
    for fix in [reorient_fixture(), pour_fixture()] {
        let prepared = prepare(&fix);
        let seed = prepared.seed_keyposes();
        let blocks = &prepared.decomposition.blocks;
        let moving_variable: BTreeSet<Arm> = blocks.iter().filter(|b| b.is_variable()).filter_map(|b| b.bound_arm).collect();
        let mut checked = 0;
        for i in (0..fix.spec.scene_count()).step_by(37) {
            let r = run_gt(&fix, &prepared, &scene_at(&fix.spec, 11, i));
            let Some(t) = r.trajectory else { continue };
            for (a, b) in t.keyposes.iter().zip(&seed) {
                if blocks[a.block].is_variable() {
                    continue;
                }
                for arm in [Arm::Left, Arm::Right] {
                    // An arm idle through an invariant block carries its last
                    // adapted state forward; compare the arms the block moves.
                    let moves = prepared.decomposition.aeps[a.block].iter().any(|e| e.arm == arm);
                    if moves || !moving_variable.contains(&arm) {
                        assert_eq!(a.sample.arm(arm), b.sample.arm(arm), "scene {i} block {}", a.block);
                    }
                }
            }
            checked += 1;
        }
        assert!(checked > 20, "{}: only {checked} passing scenes", fix.spec.name);
    }
}

fn check_stats(stats: &DatasetStats, sink: &MemorySink, n: usize) {
    assert_eq!(stats.attempts, n);
    assert_eq!(stats.passes + stats.rejects(), stats.attempts);
    assert_eq!(sink.trajectories.len(), stats.passes);
    assert_eq!(sink.rejects.len(), stats.rejects());
    for grid in stats.coverage.values() {
        assert_eq!(grid.cells.len(), grid.rows * grid.cols);
        assert_eq!(grid.cells.iter().map(|c| c.attempts).sum::<usize>(), n);
        assert_eq!(grid.cells.iter().map(|c| c.passes).sum::<usize>(), stats.passes);
        assert!(grid.cells.iter().all(|c| c.passes <= c.attempts));
    }
    let idx: Vec<usize> = sink
        .trajectories
        .iter()
        .map(|t| t.provenance.scene_index)
        .chain(sink.rejects.iter().map(|r| r.0))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    assert_eq!(idx, (0..n).collect::<Vec<_>>());
}

#[test]
fn ground_truth_dataset_counts_and_rate() {
    let fix = reorient_fixture();
    let prepared = prepare(&fix);
    let arms = fix.workspace.arms();
    let cam = fix.workspace.camera();
    let config = SynthesisConfig::default();
    let ctx = DatasetContext {
        prepared: &prepared,
        spec: &fix.spec,
        master_seed: 0,
        arms: &arms,
        camera: &cam,
        config: &config,
    };
    let mut sink = MemorySink::default();
    let stats = synthesize_dataset(&ctx, &mut sink).unwrap();
    check_stats(&stats, &sink, 1008);
    assert_eq!(stats.reject_perception, 0);
    assert!(stats.pass_rate() >= 0.9, "pass rate {}", stats.pass_rate());
    // Every accepted trajectory re-validates to a pass.
    for t in sink.trajectories.iter().step_by(50) {
        let r = demosyn_core::synthesis::validate_keyposes(&t.validation_input(), &arms, &config.validation);
        assert_eq!(r, t.validation);
    }
}

/// Scenes are independent of each other: running them out of order gives
/// the same results.
#[test]
fn scenes_are_order_independent() {
    let fix = pour_fixture();
    let prepared = prepare(&fix);
    let arms = fix.workspace.arms();
    let cam = fix.workspace.camera();
    let config = SynthesisConfig::default();
    let ctx = DatasetContext {
        prepared: &prepared,
        spec: &fix.spec,
        master_seed: 5,
        arms: &arms,
        camera: &cam,
        config: &config,
    };
    let idx = [900usize, 3, 641, 3, 1295, 0];
    let forward: BTreeMap<usize, _> = idx.iter().map(|&i| (i, ctx.run_scene(i))).collect();
    for &i in idx.iter().rev() {
        assert_eq!(ctx.run_scene(i), forward[&i]);
    }
}

#[test]
fn perception_mode_on_the_seed_scene() {
    let fix = reorient_fixture();
    let config = SynthesisConfig {
        mode: SynthesisMode::Perception,
        ..SynthesisConfig::default()
    };
    let prepared = PreparedDemo::new(fix.demo.clone(), &config, &fix.overrides).unwrap();
    let scene = fix.seed_instance();
    let cam = fix.workspace.camera();
    let obs = render_observation(&scene, &cam, fix.spec.table_z).unwrap();
    let arms = fix.workspace.arms();
    let source = ObjectSource::Perception {
        observation: &obs,
        camera: &cam,
    };
    let r = synthesize_one(&prepared, &scene, source, &arms, fix.spec.table_z, &config);
    assert_eq!(r.report.outcome, Outcome::Pass);
    // Seed and novel estimates come from identical renders.
    let t = r.trajectory.unwrap();
    assert_eq!(t.keyposes, prepared.seed_keyposes());
}
