//! Per-scene adaptation, validation and recombination.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::alignment::{adapt_block, object_delta, AlignmentDelta};
use crate::demonstration::{
    decompose, Aep, Arm, BimanualSample, Block, Decomposition, DemoError, Demonstration, Gripper, KindOverride,
    SegmentationParams,
};
use crate::geometry::{CameraModel, RigidPose};
use crate::harness::{render_observation, Observation, RenderError};
use crate::kinematics::{
    arm_capsules, config_in_collision, inverse_kinematics, path_collision_free_holding, Aabb, ArmPair, CollisionScene,
    HeldObject, IkParams, JointConfig, Obb, DEFAULT_PATH_RESOLUTION,
};
use crate::perception::{estimate_pose, estimate_pose_with_fallback, ideal_estimate, ObjectEstimate, PerceptionParams};

use super::scene::{scene_at, CellIndex, SceneInstance, SceneObject, TaskSpec};

/// Where novel object poses come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SynthesisMode {
    /// Scene poses are used directly.
    #[default]
    GroundTruth,
    /// Poses are estimated from a rendered mask and depth image.
    Perception,
}

/// Feasibility checks applied to every keypose transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationParams {
    pub ik: IkParams,
    /// Joint-space interpolation step for path checks, radians.
    pub path_resolution: f64,
    /// Tool-to-object distance within which a closing gripper picks the
    /// object up.
    pub contact_eps: f64,
}

impl Default for ValidationParams {
    fn default() -> Self {
        Self {
            ik: IkParams::default(),
            path_resolution: DEFAULT_PATH_RESOLUTION,
            contact_eps: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig {
    pub segmentation: SegmentationParams,
    pub lambda: f64,
    pub mode: SynthesisMode,
    pub perception: PerceptionParams,
    pub validation: ValidationParams,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        Self {
            segmentation: SegmentationParams::default(),
            lambda: crate::alignment::DEFAULT_LAMBDA,
            mode: SynthesisMode::GroundTruth,
            perception: PerceptionParams::default(),
            validation: ValidationParams::default(),
        }
    }
}

/// A seed demonstration with its decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedDemo {
    pub demo: Demonstration,
    pub decomposition: Decomposition,
}

impl PreparedDemo {
    pub fn new(
        demo: Demonstration,
        config: &SynthesisConfig,
        overrides: &BTreeMap<usize, KindOverride>,
    ) -> Result<Self, DemoError> {
        let decomposition = decompose(&demo, &config.segmentation, config.validation.contact_eps, overrides)?;
        Ok(Self { demo, decomposition })
    }

    /// Keyposes of the unmodified seed.
    pub fn seed_keyposes(&self) -> Vec<Keypose> {
        keyposes_from(&self.demo, &self.decomposition.blocks, &self.decomposition.aeps)
    }
}

/// Discrete bimanual waypoint, arm-base frame, tagged with its block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypose {
    pub block: usize,
    pub sample: BimanualSample,
}

/// Initial sample followed by the AEP end states of every block. AEPs of
/// both arms ending at the same sample share one keypose; an arm without an
/// AEP ending there keeps its previous state.
pub fn keyposes_from(demo: &Demonstration, blocks: &[Block], aeps: &[Vec<Aep>]) -> Vec<Keypose> {
    let samples = demo.samples();
    let mut out = alloc::vec![Keypose {
        block: 0,
        sample: samples[0],
    }];
    for (b, block_aeps) in blocks.iter().enumerate().map(|(b, _)| (b, &aeps[b])) {
        let mut ends: Vec<usize> = block_aeps.iter().map(|a| a.end_index).collect();
        ends.sort_unstable();
        ends.dedup();
        for k in ends {
            let mut s = out.last().expect("non-empty").sample;
            s.t = samples[k].t;
            for a in block_aeps.iter().filter(|a| a.end_index == k) {
                *s.arm_mut(a.arm) = a.end_state;
            }
            out.push(Keypose { block: b, sample: s });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Outcome {
    Pass,
    RejectPerception { object: String },
    RejectIk { block: usize },
    RejectCollision { block: usize },
}

impl Outcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, Outcome::Pass)
    }

    /// Short reason label used in logs and statistics.
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::RejectPerception { .. } => "reject_perception",
            Outcome::RejectIk { .. } => "reject_ik",
            Outcome::RejectCollision { .. } => "reject_collision",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCheck {
    pub ik_ok: bool,
    pub path_ok: bool,
    pub detail: Option<String>,
}

impl BlockCheck {
    fn pending() -> Self {
        Self {
            ik_ok: false,
            path_ok: false,
            detail: Some(String::from("not evaluated")),
        }
    }

    fn passed() -> Self {
        Self {
            ik_ok: true,
            path_ok: true,
            detail: None,
        }
    }
}

/// Per-block flags plus the overall outcome; `Pass` exactly when every flag
/// is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub blocks: Vec<BlockCheck>,
    pub outcome: Outcome,
}

impl ValidationReport {
    fn rejected(n_blocks: usize, outcome: Outcome) -> Self {
        Self {
            blocks: alloc::vec![BlockCheck::pending(); n_blocks],
            outcome,
        }
    }
}

/// Everything the validator needs besides the arm models.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationInput<'a> {
    pub keyposes: &'a [Keypose],
    pub blocks: &'a [Block],
    pub objects: &'a [SceneObject],
    pub table_z: f64,
}

fn object_obb(o: &SceneObject) -> Obb {
    Obb::new(o.pose, o.shape.half_extents())
}

struct Validator<'a> {
    arms: &'a ArmPair,
    params: &'a ValidationParams,
    table_z: f64,
    objects: BTreeMap<String, Obb>,
    held: [Option<(String, RigidPose)>; 2],
    ignored: [BTreeSet<String>; 2],
    q: [JointConfig; 2],
}

fn idx(arm: Arm) -> usize {
    match arm {
        Arm::Left => 0,
        Arm::Right => 1,
    }
}

impl Validator<'_> {
    fn scene_for(&self, arm: Arm, other_q: &JointConfig) -> CollisionScene {
        let far = 1e3;
        let mut scene = CollisionScene::new(
            self.table_z,
            Aabb {
                min: crate::geometry::Vec3::new(-far, -far, self.table_z),
                max: crate::geometry::Vec3::new(far, far, far),
            },
        );
        let own = self.held[idx(arm)].as_ref().map(|(id, _)| id.as_str());
        for (id, obb) in &self.objects {
            if Some(id.as_str()) != own {
                scene.objects.push(crate::kinematics::CollisionObject { id: id.clone(), obb: *obb });
            }
        }
        scene.capsules.extend(arm_capsules(self.arms.get(arm.other()), other_q));
        scene
    }

    fn tool(&self, arm: Arm) -> RigidPose {
        self.arms.get(arm).forward_kinematics(&self.q[idx(arm)])
    }

    fn refresh_held(&mut self, arm: Arm) {
        if let Some((id, rel)) = &self.held[idx(arm)] {
            let tool = self.tool(arm);
            if let Some(obb) = self.objects.get_mut(id) {
                obb.pose = tool.compose(rel);
            }
        }
    }

    fn gripper_event(&mut self, arm: Arm, from: Gripper, to: Gripper, bound: Option<&str>) {
        match (from, to) {
            (Gripper::Open, Gripper::Closed) => {
                let tool = self.tool(arm);
                let pick = bound.filter(|id| self.objects.contains_key(*id)).map(String::from).or_else(|| {
                    self.objects
                        .iter()
                        .filter(|(id, _)| !self.held.iter().flatten().any(|(h, _)| h == *id))
                        .map(|(id, obb)| (id, obb.distance_to_point(tool.translation)))
                        .filter(|(_, d)| *d <= self.params.contact_eps)
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(id, _)| id.clone())
                });
                if let Some(id) = pick {
                    let rel = tool.inverse().compose(&self.objects[&id].pose);
                    self.ignored[idx(arm)].insert(id.clone());
                    self.held[idx(arm)] = Some((id, rel));
                }
            }
            (Gripper::Closed, Gripper::Open) => {
                self.refresh_held(arm);
                self.held[idx(arm)] = None;
            }
            _ => {}
        }
    }
}

/// Replays a keypose sequence: IK for every changed arm pose (seeded from
/// the previous solution), a swept joint-space check of each move against
/// the table, the objects and the other arm frozen at its block-start
/// configuration, and gripper events that attach and release objects.
/// Objects bound to an arm are ignored by that arm from their block on.
pub fn validate_keyposes(input: &ValidationInput<'_>, arms: &ArmPair, params: &ValidationParams) -> ValidationReport {
    let n_blocks = input.blocks.len();
    let mut report = ValidationReport::rejected(n_blocks, Outcome::Pass);
    let Some(first) = input.keyposes.first() else {
        report.blocks = alloc::vec![BlockCheck::passed(); n_blocks];
        return report;
    };
    let bases = arms.bases();
    let mut v = Validator {
        arms,
        params,
        table_z: input.table_z,
        objects: input.objects.iter().map(|o| (o.id.clone(), object_obb(o))).collect(),
        held: [None, None],
        ignored: [BTreeSet::new(), BTreeSet::new()],
        q: [arms.left.home, arms.right.home],
    };
    let fail = |report: &mut ValidationReport, block: usize, ik: bool, detail: String| {
        if let Some(b) = report.blocks.get_mut(block) {
            b.ik_ok = !ik;
            b.path_ok = false;
            b.detail = Some(detail);
        }
        report.outcome = if ik {
            Outcome::RejectIk { block }
        } else {
            Outcome::RejectCollision { block }
        };
    };

    for arm in Arm::BOTH {
        let target = bases.to_world(arm, &first.sample.arm(arm).pose);
        match inverse_kinematics(arms.get(arm), &target, &arms.get(arm).home, &params.ik) {
            Ok(sol) => v.q[idx(arm)] = sol.q,
            Err(e) => {
                fail(&mut report, first.block, true, format!("{} arm: initial pose unreachable ({e:?})", arm.name()));
                return report;
            }
        }
    }
    for arm in Arm::BOTH {
        let scene = v.scene_for(arm, &v.q[idx(arm.other())]);
        if config_in_collision(arms.get(arm), &v.q[idx(arm)], &scene, &[]) {
            fail(&mut report, first.block, false, format!("{} arm: initial configuration in collision", arm.name()));
            return report;
        }
    }

    let mut current_block = first.block;
    let mut frozen = v.q;
    let mut prev = first.sample;
    for kp in &input.keyposes[1..] {
        if kp.block != current_block {
            for b in current_block..kp.block.min(n_blocks) {
                report.blocks[b] = BlockCheck::passed();
            }
            current_block = kp.block;
            frozen = v.q;
        }
        let block = input.blocks.get(kp.block);
        if let Some(b) = block {
            if let Some(obj) = &b.bound_object {
                for arm in Arm::BOTH {
                    if b.bound_arm.is_none_or(|a| a == arm) && b.category.moving_arms().contains(&arm) {
                        v.ignored[idx(arm)].insert(obj.clone());
                    }
                }
            }
        }
        let moved: Vec<Arm> = Arm::BOTH
            .into_iter()
            .filter(|&a| kp.sample.arm(a).pose != prev.arm(a).pose)
            .collect();
        let mut targets = [None, None];
        for &arm in &moved {
            let model = arms.get(arm);
            let target = bases.to_world(arm, &kp.sample.arm(arm).pose);
            match inverse_kinematics(model, &target, &v.q[idx(arm)], &params.ik) {
                Ok(sol) => targets[idx(arm)] = Some(sol.q),
                Err(e) => {
                    fail(&mut report, kp.block, true, format!("{} arm at t={:.3} s: {e:?}", arm.name(), kp.sample.t));
                    return report;
                }
            }
        }
        for &arm in &moved {
            let q1 = targets[idx(arm)].expect("solved above");
            let scene = v.scene_for(arm, &frozen[idx(arm.other())]);
            let ignore: Vec<&str> = v.ignored[idx(arm)].iter().map(String::as_str).collect();
            let held = v.held[idx(arm)].as_ref().map(|(id, rel)| HeldObject {
                id: id.as_str(),
                in_tool: Obb::new(*rel, v.objects[id].half),
            });
            let model = arms.get(arm);
            let ok = path_collision_free_holding(model, &v.q[idx(arm)], &q1, &scene, &ignore, held.as_ref(), params.path_resolution)
                .unwrap_or(false);
            if !ok {
                fail(&mut report, kp.block, false, format!("{} arm path into t={:.3} s collides", arm.name(), kp.sample.t));
                return report;
            }
            v.q[idx(arm)] = q1;
            v.refresh_held(arm);
        }
        for arm in Arm::BOTH {
            let (from, to) = (prev.arm(arm).gripper, kp.sample.arm(arm).gripper);
            if from != to {
                let bound = block
                    .filter(|b| b.bound_arm.is_none_or(|a| a == arm))
                    .and_then(|b| b.bound_object.as_deref());
                v.gripper_event(arm, from, to, bound);
            }
        }
        prev = kp.sample;
    }
    for b in current_block..n_blocks {
        report.blocks[b] = BlockCheck::passed();
    }
    report
}

/// Alignment applied to one variable block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDelta {
    pub block: usize,
    pub object: String,
    pub delta: AlignmentDelta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub seed_demo: String,
    pub scene_index: usize,
    pub scene_seed: u64,
    pub deltas: Vec<BlockDelta>,
}

/// A validated keypose trajectory for one scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedTrajectory {
    pub keyposes: Vec<Keypose>,
    pub blocks: Vec<Block>,
    pub objects: Vec<SceneObject>,
    pub table_z: f64,
    pub provenance: Provenance,
    pub validation: ValidationReport,
}

impl SynthesizedTrajectory {
    pub fn validation_input(&self) -> ValidationInput<'_> {
        ValidationInput {
            keyposes: &self.keyposes,
            blocks: &self.blocks,
            objects: &self.objects,
            table_z: self.table_z,
        }
    }
}

/// Outcome of one scene; the trajectory is present only on `Pass`.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneResult {
    pub scene_index: usize,
    pub scene_seed: u64,
    pub cells: BTreeMap<String, CellIndex>,
    pub report: ValidationReport,
    pub trajectory: Option<SynthesizedTrajectory>,
}

/// Source of novel object estimates for [`synthesize_one`].
#[derive(Debug, Clone, Copy)]
pub enum ObjectSource<'a> {
    GroundTruth,
    Perception {
        observation: &'a Observation,
        camera: &'a CameraModel,
    },
}

fn seed_estimate(prepared: &PreparedDemo, id: &str, mode: SynthesisMode, params: &PerceptionParams) -> Option<ObjectEstimate> {
    let seed = prepared.demo.seed_objects().get(id)?;
    Some(match (mode, &seed.ground_truth) {
        (SynthesisMode::GroundTruth, Some(gt)) => ideal_estimate(gt, params.reference_axis),
        _ => seed.estimate,
    })
}

/// Adapts, recombines and validates the seed for one novel scene.
pub fn synthesize_one(
    prepared: &PreparedDemo,
    scene: &SceneInstance,
    source: ObjectSource<'_>,
    arms: &ArmPair,
    table_z: f64,
    config: &SynthesisConfig,
) -> SceneResult {
    let blocks = &prepared.decomposition.blocks;
    let reject = |outcome: Outcome| SceneResult {
        scene_index: scene.index,
        scene_seed: scene.scene_seed,
        cells: scene.cells.clone(),
        report: ValidationReport::rejected(blocks.len(), outcome),
        trajectory: None,
    };
    let mode = match source {
        ObjectSource::GroundTruth => SynthesisMode::GroundTruth,
        ObjectSource::Perception { .. } => SynthesisMode::Perception,
    };

    let mut novel: BTreeMap<String, ObjectEstimate> = BTreeMap::new();
    let mut deltas = Vec::new();
    let mut aeps: Vec<Vec<Aep>> = Vec::with_capacity(blocks.len());
    for (b, block) in blocks.iter().enumerate() {
        let seed_aeps = &prepared.decomposition.aeps[b];
        let Some(id) = block.bound_object.as_ref().filter(|_| block.is_variable()) else {
            aeps.push(seed_aeps.clone());
            continue;
        };
        let Some(demo_est) = seed_estimate(prepared, id, mode, &config.perception) else {
            return reject(Outcome::RejectPerception { object: id.clone() });
        };
        if !novel.contains_key(id) {
            let est = match source {
                ObjectSource::GroundTruth => scene.objects.get(id).map(|o| ideal_estimate(o, config.perception.reference_axis)),
                ObjectSource::Perception { observation, camera } => observation.view(id).and_then(|(mask, depth)| {
                    if demo_est.degenerate {
                        estimate_pose_with_fallback(mask, depth, camera, &config.perception).ok()
                    } else {
                        estimate_pose(mask, depth, camera, &config.perception).ok()
                    }
                }),
            };
            match est {
                Some(e) => novel.insert(id.clone(), e),
                None => return reject(Outcome::RejectPerception { object: id.clone() }),
            };
        }
        let est = &novel[id];
        let delta = object_delta(&demo_est.pose, &est.pose, demo_est.bbox, est.bbox, config.lambda);
        aeps.push(adapt_block(block, seed_aeps, &delta, &est.pose.rotation, prepared.demo.arm_bases()));
        deltas.push(BlockDelta {
            block: b,
            object: id.clone(),
            delta,
        });
    }

    let keyposes = keyposes_from(&prepared.demo, blocks, &aeps);
    let objects: Vec<SceneObject> = scene.objects.values().cloned().collect();
    let input = ValidationInput {
        keyposes: &keyposes,
        blocks,
        objects: &objects,
        table_z,
    };
    let report = validate_keyposes(&input, arms, &config.validation);
    let trajectory = report.outcome.is_pass().then(|| SynthesizedTrajectory {
        keyposes: keyposes.clone(),
        blocks: blocks.clone(),
        objects: objects.clone(),
        table_z,
        provenance: Provenance {
            seed_demo: String::from(prepared.demo.task_id()),
            scene_index: scene.index,
            scene_seed: scene.scene_seed,
            deltas,
        },
        validation: report.clone(),
    });
    SceneResult {
        scene_index: scene.index,
        scene_seed: scene.scene_seed,
        cells: scene.cells.clone(),
        report,
        trajectory,
    }
}

/// Shared read-only inputs of a dataset run.
#[derive(Debug, Clone, Copy)]
pub struct DatasetContext<'a> {
    pub prepared: &'a PreparedDemo,
    pub spec: &'a TaskSpec,
    pub master_seed: u64,
    pub arms: &'a ArmPair,
    pub camera: &'a CameraModel,
    pub config: &'a SynthesisConfig,
}

impl DatasetContext<'_> {
    /// Builds, observes (in perception mode) and synthesizes scene `index`.
    /// Depends only on the context and the index.
    pub fn run_scene(&self, index: usize) -> SceneResult {
        let scene = scene_at(self.spec, self.master_seed, index);
        let table_z = self.spec.table_z;
        match self.config.mode {
            SynthesisMode::GroundTruth => {
                synthesize_one(self.prepared, &scene, ObjectSource::GroundTruth, self.arms, table_z, self.config)
            }
            SynthesisMode::Perception => match render_observation(&scene, self.camera, table_z) {
                Ok(obs) => synthesize_one(
                    self.prepared,
                    &scene,
                    ObjectSource::Perception {
                        observation: &obs,
                        camera: self.camera,
                    },
                    self.arms,
                    table_z,
                    self.config,
                ),
                Err(RenderError::OutOfFrustum(ids)) => SceneResult {
                    scene_index: scene.index,
                    scene_seed: scene.scene_seed,
                    cells: scene.cells.clone(),
                    report: ValidationReport::rejected(
                        self.prepared.decomposition.blocks.len(),
                        Outcome::RejectPerception {
                            object: ids.into_iter().next().unwrap_or_default(),
                        },
                    ),
                    trajectory: None,
                },
            },
        }
    }
}

/// Attempts and passes of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CellCoverage {
    pub attempts: usize,
    pub passes: usize,
}

/// Counts of a dataset run. Pass plus rejects always equals attempts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetStats {
    pub attempts: usize,
    pub passes: usize,
    pub reject_ik: usize,
    pub reject_collision: usize,
    pub reject_perception: usize,
    /// Per role, a `rows × cols` row-major histogram.
    pub coverage: BTreeMap<String, CoverageGrid>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoverageGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CellCoverage>,
}

impl DatasetStats {
    pub fn new(spec: &TaskSpec) -> Self {
        let coverage = spec
            .roles
            .iter()
            .map(|r| {
                (
                    r.object_id.clone(),
                    CoverageGrid {
                        rows: r.rows,
                        cols: r.cols,
                        cells: alloc::vec![CellCoverage::default(); r.rows * r.cols],
                    },
                )
            })
            .collect();
        Self {
            coverage,
            ..Self::default()
        }
    }

    pub fn record(&mut self, result: &SceneResult) {
        self.attempts += 1;
        let pass = result.report.outcome.is_pass();
        match result.report.outcome {
            Outcome::Pass => self.passes += 1,
            Outcome::RejectIk { .. } => self.reject_ik += 1,
            Outcome::RejectCollision { .. } => self.reject_collision += 1,
            Outcome::RejectPerception { .. } => self.reject_perception += 1,
        }
        for (role, cell) in &result.cells {
            if let Some(g) = self.coverage.get_mut(role) {
                if let Some(c) = g.cells.get_mut(cell.row * g.cols + cell.col) {
                    c.attempts += 1;
                    c.passes += usize::from(pass);
                }
            }
        }
    }

    pub fn rejects(&self) -> usize {
        self.reject_ik + self.reject_collision + self.reject_perception
    }

    pub fn pass_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.passes as f64 / self.attempts as f64
        }
    }
}

/// Receives scene results in enumeration order.
pub trait TrajectorySink {
    type Error;
    fn accept(&mut self, trajectory: &SynthesizedTrajectory) -> Result<(), Self::Error>;
    fn reject(&mut self, scene_index: usize, report: &ValidationReport) -> Result<(), Self::Error>;
}

/// Sink that keeps everything in memory.
#[derive(Debug, Clone, Default)]
pub struct MemorySink {
    pub trajectories: Vec<SynthesizedTrajectory>,
    pub rejects: Vec<(usize, Outcome)>,
}

impl TrajectorySink for MemorySink {
    type Error = core::convert::Infallible;

    fn accept(&mut self, trajectory: &SynthesizedTrajectory) -> Result<(), Self::Error> {
        self.trajectories.push(trajectory.clone());
        Ok(())
    }

    fn reject(&mut self, scene_index: usize, report: &ValidationReport) -> Result<(), Self::Error> {
        self.rejects.push((scene_index, report.outcome.clone()));
        Ok(())
    }
}

/// Feeds one result to the sink and the statistics.
pub fn deliver<S: TrajectorySink>(result: &SceneResult, stats: &mut DatasetStats, sink: &mut S) -> Result<(), S::Error> {
    stats.record(result);
    match &result.trajectory {
        Some(t) => sink.accept(t),
        None => sink.reject(result.scene_index, &result.report),
    }
}

/// Sequential dataset run over every scene of the spec.
pub fn synthesize_dataset<S: TrajectorySink>(ctx: &DatasetContext<'_>, sink: &mut S) -> Result<DatasetStats, S::Error> {
    let mut stats = DatasetStats::new(ctx.spec);
    for i in 0..ctx.spec.scene_count() {
        deliver(&ctx.run_scene(i), &mut stats, sink)?;
    }
    Ok(stats)
}
