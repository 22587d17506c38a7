//! Seed demonstration model and its deconstruction into execution blocks and
//! atomic execution primitives (AEPs).
//!
//! A block owns the sample range `[start, end)`. Its *terminal* state is the
//! first sample of the next block (or its own last sample for the final
//! block), so consecutive blocks share a boundary state and no motion falls
//! between them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::geometry::{RigidPose, Vec3};
use crate::perception::ObjectEstimate;
use crate::synthesis::SceneObject;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DemoError {
    #[error("demonstration needs at least 2 samples, got {count}")]
    EmptyDemo { count: usize },
    #[error("timestamps must be finite, non-negative and strictly increasing (sample {index})")]
    NonMonotonicTime { index: usize },
    #[error("sample {index} has a non-finite pose")]
    NonFinitePose { index: usize },
    #[error("unknown seed object `{0}`")]
    UnknownObject(String),
    #[error("invalid segmentation parameters: {0}")]
    InvalidParams(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    Left,
    Right,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Left, Arm::Right];

    pub fn other(self) -> Arm {
        match self {
            Arm::Left => Arm::Right,
            Arm::Right => Arm::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Arm::Left => "left",
            Arm::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gripper {
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmState {
    /// End-effector pose in the arm-base frame.
    pub pose: RigidPose,
    pub gripper: Gripper,
}

impl ArmState {
    pub fn new(pose: RigidPose, gripper: Gripper) -> Self {
        Self { pose, gripper }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BimanualSample {
    pub t: f64,
    pub left: ArmState,
    pub right: ArmState,
}

impl BimanualSample {
    pub fn arm(&self, arm: Arm) -> &ArmState {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }

    pub fn arm_mut(&mut self, arm: Arm) -> &mut ArmState {
        match arm {
            Arm::Left => &mut self.left,
            Arm::Right => &mut self.right,
        }
    }
}

/// World-frame poses of the two arm bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmBases {
    pub left: RigidPose,
    pub right: RigidPose,
}

impl ArmBases {
    pub fn get(&self, arm: Arm) -> &RigidPose {
        match arm {
            Arm::Left => &self.left,
            Arm::Right => &self.right,
        }
    }

    pub fn to_world(&self, arm: Arm, pose: &RigidPose) -> RigidPose {
        self.get(arm).compose(pose)
    }

    pub fn to_base(&self, arm: Arm, world: &RigidPose) -> RigidPose {
        self.get(arm).inverse().compose(world)
    }
}

/// A manipulated object as observed in the seed scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedObject {
    /// Perceived pose and bounding box (`P_demo`, `b_demo`).
    pub estimate: ObjectEstimate,
    /// Ground-truth placement of the seed scene, when known. Used by
    /// ground-truth synthesis so that seed and novel poses share a frame.
    pub ground_truth: Option<SceneObject>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    task_id: String,
    samples: Vec<BimanualSample>,
    seed_objects: BTreeMap<String, SeedObject>,
    arm_bases: ArmBases,
}

impl Demonstration {
    pub fn new(
        task_id: impl Into<String>,
        samples: Vec<BimanualSample>,
        seed_objects: BTreeMap<String, SeedObject>,
        arm_bases: ArmBases,
    ) -> Result<Self, DemoError> {
        if samples.len() < 2 {
            return Err(DemoError::EmptyDemo { count: samples.len() });
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.t >= 0.0) || (i > 0 && s.t <= samples[i - 1].t) {
                return Err(DemoError::NonMonotonicTime { index: i });
            }
            if !(s.left.pose.is_finite() && s.right.pose.is_finite()) {
                return Err(DemoError::NonFinitePose { index: i });
            }
        }
        Ok(Self {
            task_id: task_id.into(),
            samples,
            seed_objects,
            arm_bases,
        })
    }

    pub fn task_id(&self) -> &str {
        &self.task_id
    }

    pub fn samples(&self) -> &[BimanualSample] {
        &self.samples
    }

    pub fn seed_objects(&self) -> &BTreeMap<String, SeedObject> {
        &self.seed_objects
    }

    pub fn arm_bases(&self) -> &ArmBases {
        &self.arm_bases
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index of the terminal state for a block ending (exclusively) at `end`.
    pub fn terminal_index(&self, end: usize) -> usize {
        end.min(self.samples.len() - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockCategory {
    SingleArmLeft,
    SingleArmRight,
    DualArm,
    Static,
}

impl BlockCategory {
    pub fn moving_arms(self) -> &'static [Arm] {
        match self {
            BlockCategory::SingleArmLeft => &[Arm::Left],
            BlockCategory::SingleArmRight => &[Arm::Right],
            BlockCategory::DualArm => &Arm::BOTH,
            BlockCategory::Static => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockKind {
    Invariant,
    Variable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    pub category: BlockCategory,
    /// `None` until [`categorize_kinds`] runs.
    pub kind: Option<BlockKind>,
    /// Set when an endpoint displacement fell inside the `(ζ, δ)` band.
    pub ambiguous: bool,
    pub bound_object: Option<String>,
    /// The arm whose grasp or approach bound the object.
    pub bound_arm: Option<Arm>,
}

impl Block {
    pub fn is_variable(&self) -> bool {
        self.kind == Some(BlockKind::Variable)
    }
}

/// Why an AEP was closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AepTrigger {
    /// Accumulated motion reached γ.
    Distance,
    /// Elapsed time reached `T_max`.
    Duration,
    /// The gripper changed state.
    GripperEvent,
    /// Remainder of the block that could not be merged into a predecessor.
    Tail,
}

/// Atomic execution primitive: one arm's salient transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aep {
    pub arm: Arm,
    pub start_index: usize,
    pub end_index: usize,
    pub start_state: ArmState,
    pub end_state: ArmState,
    pub duration: f64,
    pub trigger: AepTrigger,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationParams {
    /// Minimal motion saliency δ (m).
    pub delta: f64,
    /// Static tolerance ζ (m).
    pub zeta: f64,
    /// AEP distance threshold γ (m).
    pub gamma: f64,
    /// Maximum AEP duration (s).
    pub t_max: f64,
    /// Rotation weight β (m/rad).
    pub beta: f64,
    /// Minimum pause length that separates blocks (s).
    pub pause_span: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            delta: 0.05,
            zeta: 0.005,
            gamma: 0.03,
            t_max: 5.0,
            beta: 0.1,
            pause_span: 0.5,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<(), DemoError> {
        if !(self.zeta > 0.0 && self.zeta < self.delta) {
            return Err(DemoError::InvalidParams("need 0 < zeta < delta"));
        }
        if !(self.gamma > 0.0) {
            return Err(DemoError::InvalidParams("gamma must be positive"));
        }
        if !(self.t_max > 0.0) {
            return Err(DemoError::InvalidParams("t_max must be positive"));
        }
        if !(self.beta >= 0.0) {
            return Err(DemoError::InvalidParams("beta must be non-negative"));
        }
        if !(self.pause_span >= 0.0 && self.pause_span.is_finite()) {
            return Err(DemoError::InvalidParams("pause_span must be finite and non-negative"));
        }
        Ok(())
    }

    /// [`motion_distance`] with this parameter set (gripper bonus = δ).
    pub fn distance(&self, a: &ArmState, b: &ArmState) -> f64 {
        motion_distance(a, b, self.beta, self.delta)
    }
}

/// Pose-only distance `‖p_a − p_b‖ + β·angle(R_a, R_b)`.
pub fn pose_distance(a: &RigidPose, b: &RigidPose, beta: f64) -> f64 {
    a.translation.distance(b.translation) + beta * a.rotation.angle_to(&b.rotation)
}

/// Pose distance plus `gripper_bonus` when the gripper states differ.
pub fn motion_distance(a: &ArmState, b: &ArmState, beta: f64, gripper_bonus: f64) -> f64 {
    let d = pose_distance(&a.pose, &b.pose, beta);
    if a.gripper != b.gripper {
        d + gripper_bonus
    } else {
        d
    }
}

/// Category and ambiguity flag from endpoint displacements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub category: BlockCategory,
    pub ambiguous: bool,
}

/// Endpoint-displacement test: an arm moves when `d ≥ δ` and rests when
/// `d ≤ ζ`. Displacements in the open band `(ζ, δ)` count as resting but flag
/// the block.
pub fn classify_displacements(d_left: f64, d_right: f64, params: &SegmentationParams) -> Classification {
    let moving = |d: f64| d >= params.delta;
    let in_band = |d: f64| d > params.zeta && d < params.delta;
    let category = match (moving(d_left), moving(d_right)) {
        (true, true) => BlockCategory::DualArm,
        (true, false) => BlockCategory::SingleArmLeft,
        (false, true) => BlockCategory::SingleArmRight,
        (false, false) => BlockCategory::Static,
    };
    Classification {
        category,
        ambiguous: in_band(d_left) || in_band(d_right),
    }
}

/// Classifies the block `[start, end)` of `demo` from its endpoint states.
pub fn classify_block(demo: &Demonstration, start: usize, end: usize, params: &SegmentationParams) -> Classification {
    let s = &demo.samples()[start];
    let e = &demo.samples()[demo.terminal_index(end)];
    classify_displacements(
        params.distance(&s.left, &e.left),
        params.distance(&s.right, &e.right),
        params,
    )
}

fn gripper_flip(demo: &Demonstration, i: usize) -> bool {
    let s = demo.samples();
    s[i].left.gripper != s[i - 1].left.gripper || s[i].right.gripper != s[i - 1].right.gripper
}

/// Splits the demonstration at kinesthetic pauses and gripper flips.
///
/// A step `i → i+1` is static when both arms' pose distance stays below ζ.
/// Every maximal run of static steps lasting at least `pause_span` that does
/// not touch either end of the demonstration contributes one boundary at its
/// midpoint sample, unless it contains gripper flips, in which case the flips
/// themselves are the boundaries. Flips outside pauses are boundaries too.
pub fn segment_blocks(demo: &Demonstration, params: &SegmentationParams) -> Result<Vec<Block>, DemoError> {
    params.validate()?;
    let samples = demo.samples();
    let n = samples.len();
    if n < 2 {
        return Err(DemoError::EmptyDemo { count: n });
    }

    let is_static = |i: usize| {
        pose_distance(&samples[i].left.pose, &samples[i + 1].left.pose, params.beta) < params.zeta
            && pose_distance(&samples[i].right.pose, &samples[i + 1].right.pose, params.beta) < params.zeta
    };

    let flips: Vec<usize> = (1..n).filter(|&i| gripper_flip(demo, i)).collect();
    let mut boundaries: Vec<usize> = Vec::new();
    let mut claimed = alloc::vec![false; flips.len()];

    let mut i = 0;
    while i + 1 < n {
        if !is_static(i) {
            i += 1;
            continue;
        }
        let a = i;
        while i + 1 < n && is_static(i) {
            i += 1;
        }
        let b = i;
        if samples[b].t - samples[a].t < params.pause_span || a == 0 || b == n - 1 {
            continue;
        }
        let mut inside = false;
        for (k, &f) in flips.iter().enumerate() {
            if f > a && f <= b {
                boundaries.push(f);
                claimed[k] = true;
                inside = true;
            }
        }
        if !inside {
            boundaries.push((a + b) / 2);
        }
    }
    for (k, &f) in flips.iter().enumerate() {
        if !claimed[k] {
            boundaries.push(f);
        }
    }
    boundaries.retain(|&b| b > 0 && b < n);
    boundaries.sort_unstable();
    boundaries.dedup();

    let mut blocks = Vec::with_capacity(boundaries.len() + 1);
    let mut start = 0;
    for end in boundaries.into_iter().chain(core::iter::once(n)) {
        let c = classify_block(demo, start, end, params);
        blocks.push(Block {
            start,
            end,
            category: c.category,
            kind: None,
            ambiguous: c.ambiguous,
            bound_object: None,
            bound_arm: None,
        });
        start = end;
    }
    Ok(blocks)
}

/// Refines a block into per-arm AEPs by a greedy forward scan.
///
/// For each moving arm an AEP closes whenever the pose distance from its
/// start reaches γ, its duration reaches `T_max`, or the gripper flips (the
/// flip sample becomes the boundary). A remainder shorter than γ/2 is merged
/// into the preceding distance- or duration-closed AEP when that keeps the
/// duration within `T_max`; otherwise it becomes its own `Tail` AEP. Static
/// blocks yield no AEPs.
pub fn refine_to_aeps(block: &Block, demo: &Demonstration, params: &SegmentationParams) -> Vec<Aep> {
    let samples = demo.samples();
    let terminal = demo.terminal_index(block.end);
    let mut out = Vec::new();
    for &arm in block.category.moving_arms() {
        let make = |from: usize, to: usize, trigger: AepTrigger| Aep {
            arm,
            start_index: from,
            end_index: to,
            start_state: *samples[from].arm(arm),
            end_state: *samples[to].arm(arm),
            duration: samples[to].t - samples[from].t,
            trigger,
        };
        let mut aeps: Vec<Aep> = Vec::new();
        let mut anchor = block.start;
        for i in (block.start + 1)..=terminal {
            let prev = samples[i - 1].arm(arm);
            let cur = samples[i].arm(arm);
            let trigger = if cur.gripper != prev.gripper {
                Some(AepTrigger::GripperEvent)
            } else if pose_distance(&samples[anchor].arm(arm).pose, &cur.pose, params.beta) >= params.gamma {
                Some(AepTrigger::Distance)
            } else if samples[i].t - samples[anchor].t >= params.t_max {
                Some(AepTrigger::Duration)
            } else {
                None
            };
            if let Some(trigger) = trigger {
                aeps.push(make(anchor, i, trigger));
                anchor = i;
            }
        }
        if anchor < terminal {
            let tail = pose_distance(&samples[anchor].arm(arm).pose, &samples[terminal].arm(arm).pose, params.beta);
            let mergeable = aeps.last().is_some_and(|last| {
                matches!(last.trigger, AepTrigger::Distance | AepTrigger::Duration)
                    && samples[terminal].t - samples[last.start_index].t <= params.t_max
            });
            if tail < 0.5 * params.gamma && mergeable {
                let last = aeps.last_mut().expect("checked above");
                *last = Aep {
                    trigger: last.trigger,
                    ..make(last.start_index, terminal, last.trigger)
                };
            } else {
                aeps.push(make(anchor, terminal, AepTrigger::Tail));
            }
        }
        out.extend(aeps);
    }
    out
}

/// Caller-supplied categorization that takes precedence over the heuristic.
#[derive(Debug, Clone, PartialEq)]
pub enum KindOverride {
    Invariant,
    Variable { object: String, arm: Option<Arm> },
}

/// Distance from `p` to the oriented box of a seed object (0 inside).
pub fn distance_to_object(p: Vec3, estimate: &ObjectEstimate) -> f64 {
    let (center, half) = estimate.volume();
    let local = center.inverse().transform_point(p);
    let dx = (local.x.abs() - half.x).max(0.0);
    let dy = (local.y.abs() - half.y).max(0.0);
    let dz = (local.z.abs() - half.z).max(0.0);
    Vec3::new(dx, dy, dz).norm()
}

fn nearest_object(demo: &Demonstration, p: Vec3) -> Option<(&str, f64)> {
    demo.seed_objects()
        .iter()
        .map(|(id, o)| (id.as_str(), distance_to_object(p, &o.estimate)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

/// Labels blocks invariant or variable.
///
/// A block is variable when it contains an arm's first open→closed
/// transition with the tool within `contact_eps` of a seed object's box, or
/// when, before that arm's first grasp, it ends with the moving arm open and
/// within `contact_eps` of an object (pre-grasp approach). The nearest object
/// is bound. Overrides win.
pub fn categorize_kinds(
    blocks: &[Block],
    demo: &Demonstration,
    contact_eps: f64,
    overrides: &BTreeMap<usize, KindOverride>,
) -> Result<Vec<Block>, DemoError> {
    let samples = demo.samples();
    let bases = demo.arm_bases();
    let tool_world = |i: usize, arm: Arm| bases.to_world(arm, &samples[i].arm(arm).pose).translation;

    let mut out: Vec<Block> = blocks
        .iter()
        .cloned()
        .map(|mut b| {
            b.kind = Some(BlockKind::Invariant);
            b.bound_object = None;
            b.bound_arm = None;
            b
        })
        .collect();

    let block_of_step = |i: usize| blocks.iter().position(|b| b.start < i && i - 1 < b.end);

    for arm in Arm::BOTH {
        let first_close = (1..samples.len()).find(|&i| {
            samples[i - 1].arm(arm).gripper == Gripper::Open && samples[i].arm(arm).gripper == Gripper::Closed
        });
        let grasp = first_close.and_then(|i| {
            nearest_object(demo, tool_world(i, arm))
                .filter(|(_, d)| *d <= contact_eps)
                .map(|(id, _)| (i, id))
        });
        if let Some((i, id)) = grasp {
            if let Some(k) = block_of_step(i) {
                mark_variable(&mut out[k], id, arm);
            }
        }
        let limit = first_close.unwrap_or(samples.len());
        for (k, b) in blocks.iter().enumerate() {
            let terminal = demo.terminal_index(b.end);
            if terminal > limit || out[k].is_variable() || !b.category.moving_arms().contains(&arm) {
                continue;
            }
            if samples[terminal].arm(arm).gripper != Gripper::Open {
                continue;
            }
            if let Some((id, d)) = nearest_object(demo, tool_world(terminal, arm)) {
                if d <= contact_eps {
                    mark_variable(&mut out[k], id, arm);
                }
            }
        }
    }

    for (&k, ov) in overrides {
        let Some(b) = out.get_mut(k) else { continue };
        match ov {
            KindOverride::Invariant => {
                b.kind = Some(BlockKind::Invariant);
                b.bound_object = None;
                b.bound_arm = None;
            }
            KindOverride::Variable { object, arm } => {
                if !demo.seed_objects().contains_key(object) {
                    return Err(DemoError::UnknownObject(object.clone()));
                }
                b.kind = Some(BlockKind::Variable);
                b.bound_object = Some(object.clone());
                b.bound_arm = *arm;
            }
        }
    }
    Ok(out)
}

fn mark_variable(b: &mut Block, object: &str, arm: Arm) {
    b.kind = Some(BlockKind::Variable);
    b.bound_object = Some(String::from(object));
    b.bound_arm = Some(arm);
}

/// Blocks plus the AEPs of each block, index-aligned.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub blocks: Vec<Block>,
    pub aeps: Vec<Vec<Aep>>,
}

impl Decomposition {
    pub fn aep_count(&self) -> usize {
        self.aeps.iter().map(Vec::len).sum()
    }
}

/// Full deconstruction: segmentation, refinement and categorization.
pub fn decompose(
    demo: &Demonstration,
    params: &SegmentationParams,
    contact_eps: f64,
    overrides: &BTreeMap<usize, KindOverride>,
) -> Result<Decomposition, DemoError> {
    let blocks = segment_blocks(demo, params)?;
    let blocks = categorize_kinds(&blocks, demo, contact_eps, overrides)?;
    let aeps = blocks.iter().map(|b| refine_to_aeps(b, demo, params)).collect();
    Ok(Decomposition { blocks, aeps })
}
