use std::path::Path;

use demosyn_core::alignment::AlignmentDelta;
use demosyn_core::demonstration::{Aep, AepTrigger, Block, BlockCategory, BlockKind, Decomposition};
use demosyn_core::geometry::Vec3;
use demosyn_core::synthesis::{
    BlockCheck, BlockDelta, Keypose, Outcome, Provenance, SynthesizedTrajectory, ValidationReport,
};
use serde::{Deserialize, Serialize};

use super::{read_json, ArmBasesRecord, ArmName, FormatError, PoseRecord, SampleRecord, SceneObjectRecord};

pub const TRAJECTORY_FORMAT: &str = "demosyn-trajectory/1";
pub const BLOCKS_FORMAT: &str = "demosyn-blocks/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CategoryRecord {
    SingleArmLeft,
    SingleArmRight,
    DualArm,
    Static,
}

impl From<BlockCategory> for CategoryRecord {
    fn from(c: BlockCategory) -> Self {
        match c {
            BlockCategory::SingleArmLeft => CategoryRecord::SingleArmLeft,
            BlockCategory::SingleArmRight => CategoryRecord::SingleArmRight,
            BlockCategory::DualArm => CategoryRecord::DualArm,
            BlockCategory::Static => CategoryRecord::Static,
        }
    }
}

impl From<CategoryRecord> for BlockCategory {
    fn from(c: CategoryRecord) -> Self {
        match c {
            CategoryRecord::SingleArmLeft => BlockCategory::SingleArmLeft,
            CategoryRecord::SingleArmRight => BlockCategory::SingleArmRight,
            CategoryRecord::DualArm => BlockCategory::DualArm,
            CategoryRecord::Static => BlockCategory::Static,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindRecord {
    Invariant,
    Variable,
}

/// Block annotation; `end` is exclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockRecord {
    pub start: usize,
    pub end: usize,
    pub category: CategoryRecord,
    pub kind: Option<KindRecord>,
    #[serde(default)]
    pub ambiguous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_arm: Option<ArmName>,
}

impl From<&Block> for BlockRecord {
    fn from(b: &Block) -> Self {
        Self {
            start: b.start,
            end: b.end,
            category: b.category.into(),
            kind: b.kind.map(|k| match k {
                BlockKind::Invariant => KindRecord::Invariant,
                BlockKind::Variable => KindRecord::Variable,
            }),
            ambiguous: b.ambiguous,
            bound_object: b.bound_object.clone(),
            bound_arm: b.bound_arm.map(ArmName::from),
        }
    }
}

impl From<&BlockRecord> for Block {
    fn from(b: &BlockRecord) -> Self {
        Block {
            start: b.start,
            end: b.end,
            category: b.category.into(),
            kind: b.kind.map(|k| match k {
                KindRecord::Invariant => BlockKind::Invariant,
                KindRecord::Variable => BlockKind::Variable,
            }),
            ambiguous: b.ambiguous,
            bound_object: b.bound_object.clone(),
            bound_arm: b.bound_arm.map(Into::into),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaRecord {
    pub block: usize,
    pub object: String,
    pub transform: PoseRecord,
    /// `(Δl, Δw, Δh)`, meters.
    pub size_offset: [f64; 3],
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvenanceRecord {
    pub seed_demo: String,
    pub scene_index: usize,
    pub scene_seed: u64,
    pub deltas: Vec<DeltaRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OutcomeRecord {
    Pass,
    RejectPerception { object: String },
    RejectIk { block: usize },
    RejectCollision { block: usize },
}

impl From<&Outcome> for OutcomeRecord {
    fn from(o: &Outcome) -> Self {
        match o {
            Outcome::Pass => OutcomeRecord::Pass,
            Outcome::RejectPerception { object } => OutcomeRecord::RejectPerception { object: object.clone() },
            Outcome::RejectIk { block } => OutcomeRecord::RejectIk { block: *block },
            Outcome::RejectCollision { block } => OutcomeRecord::RejectCollision { block: *block },
        }
    }
}

impl From<&OutcomeRecord> for Outcome {
    fn from(o: &OutcomeRecord) -> Self {
        match o {
            OutcomeRecord::Pass => Outcome::Pass,
            OutcomeRecord::RejectPerception { object } => Outcome::RejectPerception { object: object.clone() },
            OutcomeRecord::RejectIk { block } => Outcome::RejectIk { block: *block },
            OutcomeRecord::RejectCollision { block } => Outcome::RejectCollision { block: *block },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockCheckRecord {
    pub ik_ok: bool,
    pub path_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationRecord {
    pub outcome: OutcomeRecord,
    pub blocks: Vec<BlockCheckRecord>,
}

impl From<&ValidationReport> for ValidationRecord {
    fn from(r: &ValidationReport) -> Self {
        Self {
            outcome: (&r.outcome).into(),
            blocks: r
                .blocks
                .iter()
                .map(|b| BlockCheckRecord {
                    ik_ok: b.ik_ok,
                    path_ok: b.path_ok,
                    detail: b.detail.clone(),
                })
                .collect(),
        }
    }
}

impl From<&ValidationRecord> for ValidationReport {
    fn from(r: &ValidationRecord) -> Self {
        Self {
            outcome: (&r.outcome).into(),
            blocks: r
                .blocks
                .iter()
                .map(|b| BlockCheck {
                    ik_ok: b.ik_ok,
                    path_ok: b.path_ok,
                    detail: b.detail.clone(),
                })
                .collect(),
        }
    }
}

/// Synthesized trajectory file: the demonstration layout with keyposes as
/// samples (each tagged with its block), plus scene, provenance and
/// validation fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryRecord {
    pub format: String,
    pub task_id: String,
    pub arm_bases: ArmBasesRecord,
    pub samples: Vec<SampleRecord>,
    pub blocks: Vec<BlockRecord>,
    pub objects: Vec<SceneObjectRecord>,
    pub table_z: f64,
    pub provenance: ProvenanceRecord,
    pub validation: ValidationRecord,
}

impl TrajectoryRecord {
    pub fn new(t: &SynthesizedTrajectory, bases: &demosyn_core::demonstration::ArmBases) -> Self {
        Self {
            format: TRAJECTORY_FORMAT.into(),
            task_id: t.provenance.seed_demo.clone(),
            arm_bases: bases.into(),
            samples: t.keyposes.iter().map(|k| SampleRecord::new(&k.sample, Some(k.block))).collect(),
            blocks: t.blocks.iter().map(BlockRecord::from).collect(),
            objects: t.objects.iter().map(SceneObjectRecord::from).collect(),
            table_z: t.table_z,
            provenance: ProvenanceRecord {
                seed_demo: t.provenance.seed_demo.clone(),
                scene_index: t.provenance.scene_index,
                scene_seed: t.provenance.scene_seed,
                deltas: t
                    .provenance
                    .deltas
                    .iter()
                    .map(|d| DeltaRecord {
                        block: d.block,
                        object: d.object.clone(),
                        transform: (&d.delta.transform).into(),
                        size_offset: d.delta.size_offset.to_array(),
                        lambda: d.delta.lambda,
                    })
                    .collect(),
            },
            validation: (&t.validation).into(),
        }
    }

    pub fn to_trajectory(&self, path: &Path) -> Result<(SynthesizedTrajectory, demosyn_core::demonstration::ArmBases), FormatError> {
        if self.format != TRAJECTORY_FORMAT {
            return Err(FormatError::invalid(path, format!("unsupported format `{}`, expected `{TRAJECTORY_FORMAT}`", self.format)));
        }
        let bases = self.arm_bases.to_bases(path)?;
        let keyposes = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let block = s.block.ok_or_else(|| FormatError::invalid(path, format!("samples[{i}]: missing block index")))?;
                if block >= self.blocks.len() {
                    return Err(FormatError::invalid(path, format!("samples[{i}]: block {block} out of range")));
                }
                Ok(Keypose {
                    block,
                    sample: s.to_sample(path, i)?,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let objects = self.objects.iter().map(|o| o.to_object(path)).collect::<Result<Vec<_>, _>>()?;
        let deltas = self
            .provenance
            .deltas
            .iter()
            .map(|d| {
                Ok(BlockDelta {
                    block: d.block,
                    object: d.object.clone(),
                    delta: AlignmentDelta {
                        transform: d.transform.to_pose_at(path, "provenance delta")?,
                        size_offset: Vec3::from_array(d.size_offset),
                        lambda: d.lambda,
                    },
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        Ok((
            SynthesizedTrajectory {
                keyposes,
                blocks: self.blocks.iter().map(Block::from).collect(),
                objects,
                table_z: self.table_z,
                provenance: Provenance {
                    seed_demo: self.provenance.seed_demo.clone(),
                    scene_index: self.provenance.scene_index,
                    scene_seed: self.provenance.scene_seed,
                    deltas,
                },
                validation: (&self.validation).into(),
            },
            bases,
        ))
    }
}

pub fn load_trajectory(path: &Path) -> Result<(SynthesizedTrajectory, demosyn_core::demonstration::ArmBases), FormatError> {
    read_json::<TrajectoryRecord>(path)?.to_trajectory(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriggerRecord {
    Distance,
    Duration,
    GripperEvent,
    Tail,
}

impl From<AepTrigger> for TriggerRecord {
    fn from(t: AepTrigger) -> Self {
        match t {
            AepTrigger::Distance => TriggerRecord::Distance,
            AepTrigger::Duration => TriggerRecord::Duration,
            AepTrigger::GripperEvent => TriggerRecord::GripperEvent,
            AepTrigger::Tail => TriggerRecord::Tail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AepRecord {
    pub arm: ArmName,
    pub start_index: usize,
    pub end_index: usize,
    pub duration: f64,
    pub trigger: TriggerRecord,
}

impl From<&Aep> for AepRecord {
    fn from(a: &Aep) -> Self {
        Self {
            arm: a.arm.into(),
            start_index: a.start_index,
            end_index: a.end_index,
            duration: a.duration,
            trigger: a.trigger.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReportEntry {
    #[serde(flatten)]
    pub block: BlockRecord,
    pub aeps: Vec<AepRecord>,
}

/// Output of the `decompose` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    pub format: String,
    pub task_id: String,
    pub samples: usize,
    pub aep_count: usize,
    pub blocks: Vec<BlockReportEntry>,
}

impl BlockReport {
    pub fn new(task_id: &str, samples: usize, d: &Decomposition) -> Self {
        Self {
            format: BLOCKS_FORMAT.into(),
            task_id: task_id.into(),
            samples,
            aep_count: d.aep_count(),
            blocks: d
                .blocks
                .iter()
                .zip(&d.aeps)
                .map(|(b, a)| BlockReportEntry {
                    block: b.into(),
                    aeps: a.iter().map(AepRecord::from).collect(),
                })
                .collect(),
        }
    }
}
