use std::collections::BTreeMap;
use std::path::Path;

use demosyn_core::demonstration::{
    Arm, ArmBases, ArmState, BimanualSample, Demonstration, Gripper, KindOverride, SeedObject,
};
use demosyn_core::geometry::Vec3;
use demosyn_core::perception::{BoxDims, ObjectEstimate};
use serde::{Deserialize, Serialize};

use super::{read_json, write_json, FormatError, PoseRecord, SceneObjectRecord};

pub const DEMO_FORMAT: &str = "demosyn-demo/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArmName {
    Left,
    Right,
}

impl From<Arm> for ArmName {
    fn from(a: Arm) -> Self {
        match a {
            Arm::Left => ArmName::Left,
            Arm::Right => ArmName::Right,
        }
    }
}

impl From<ArmName> for Arm {
    fn from(a: ArmName) -> Self {
        match a {
            ArmName::Left => Arm::Left,
            ArmName::Right => Arm::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmBasesRecord {
    pub left: PoseRecord,
    pub right: PoseRecord,
}

impl From<&ArmBases> for ArmBasesRecord {
    fn from(b: &ArmBases) -> Self {
        Self {
            left: (&b.left).into(),
            right: (&b.right).into(),
        }
    }
}

impl ArmBasesRecord {
    pub fn to_bases(&self, path: &Path) -> Result<ArmBases, FormatError> {
        Ok(ArmBases {
            left: self.left.to_pose_at(path, "arm_bases.left")?,
            right: self.right.to_pose_at(path, "arm_bases.right")?,
        })
    }
}

/// One arm at one instant: tool pose in the arm-base frame and gripper bit
/// (0 open, 1 closed).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmStateRecord {
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
    pub gripper: u8,
}

impl From<&ArmState> for ArmStateRecord {
    fn from(s: &ArmState) -> Self {
        let p = PoseRecord::from(&s.pose);
        Self {
            position: p.position,
            quaternion: p.quaternion,
            gripper: match s.gripper {
                Gripper::Open => 0,
                Gripper::Closed => 1,
            },
        }
    }
}

impl ArmStateRecord {
    fn to_state(self, path: &Path, what: &str) -> Result<ArmState, FormatError> {
        let pose = PoseRecord {
            position: self.position,
            quaternion: self.quaternion,
        }
        .to_pose_at(path, what)?;
        let gripper = match self.gripper {
            0 => Gripper::Open,
            1 => Gripper::Closed,
            g => return Err(FormatError::invalid(path, format!("{what}: gripper must be 0 or 1, got {g}"))),
        };
        Ok(ArmState::new(pose, gripper))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub t: f64,
    pub left: ArmStateRecord,
    pub right: ArmStateRecord,
    /// Block index; present on synthesized keyposes only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
}

impl SampleRecord {
    pub fn new(s: &BimanualSample, block: Option<usize>) -> Self {
        Self {
            t: s.t,
            left: (&s.left).into(),
            right: (&s.right).into(),
            block,
        }
    }

    pub fn to_sample(&self, path: &Path, index: usize) -> Result<BimanualSample, FormatError> {
        Ok(BimanualSample {
            t: self.t,
            left: self.left.to_state(path, &format!("samples[{index}].left"))?,
            right: self.right.to_state(path, &format!("samples[{index}].right"))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BboxRecord {
    pub l: f64,
    pub w: f64,
    pub h: f64,
}

/// Perceived seed object. In planar estimates the pose translation is the
/// top-surface center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedObjectRecord {
    pub pose: PoseRecord,
    pub bbox: BboxRecord,
    #[serde(default = "default_true")]
    pub planar: bool,
    #[serde(default)]
    pub degenerate: bool,
    #[serde(default)]
    pub pixel_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowest_point: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<SceneObjectRecord>,
}

fn default_true() -> bool {
    true
}

impl From<&SeedObject> for SeedObjectRecord {
    fn from(o: &SeedObject) -> Self {
        let e = &o.estimate;
        Self {
            pose: (&e.pose).into(),
            bbox: BboxRecord {
                l: e.bbox.l,
                w: e.bbox.w,
                h: e.bbox.h,
            },
            planar: e.planar,
            degenerate: e.degenerate,
            pixel_count: e.pixel_count,
            lowest_point: Some(e.lowest_point.to_array()),
            ground_truth: o.ground_truth.as_ref().map(SceneObjectRecord::from),
        }
    }
}

impl SeedObjectRecord {
    fn to_seed(&self, path: &Path, id: &str) -> Result<SeedObject, FormatError> {
        let pose = self.pose.to_pose_at(path, &format!("seed_objects.{id}.pose"))?;
        let b = self.bbox;
        if !(b.l > 0.0 && b.w > 0.0 && b.h > 0.0) {
            return Err(FormatError::invalid(path, format!("seed_objects.{id}.bbox: dimensions must be positive")));
        }
        let lowest = self
            .lowest_point
            .map(Vec3::from_array)
            .unwrap_or(pose.translation - Vec3::Z * if self.planar { b.h } else { 0.5 * b.h });
        Ok(SeedObject {
            estimate: ObjectEstimate {
                pose,
                bbox: BoxDims::new(b.l, b.w, b.h),
                pixel_count: self.pixel_count,
                planar: self.planar,
                degenerate: self.degenerate,
                lowest_point: lowest,
            },
            ground_truth: self.ground_truth.as_ref().map(|g| g.to_object(path)).transpose()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OverrideRecord {
    Invariant,
    Variable {
        object: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arm: Option<ArmName>,
    },
}

impl From<&KindOverride> for OverrideRecord {
    fn from(o: &KindOverride) -> Self {
        match o {
            KindOverride::Invariant => OverrideRecord::Invariant,
            KindOverride::Variable { object, arm } => OverrideRecord::Variable {
                object: object.clone(),
                arm: arm.map(ArmName::from),
            },
        }
    }
}

impl From<&OverrideRecord> for KindOverride {
    fn from(o: &OverrideRecord) -> Self {
        match o {
            OverrideRecord::Invariant => KindOverride::Invariant,
            OverrideRecord::Variable { object, arm } => KindOverride::Variable {
                object: object.clone(),
                arm: arm.map(Arm::from),
            },
        }
    }
}

/// Demonstration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoRecord {
    pub format: String,
    pub task_id: String,
    pub arm_bases: ArmBasesRecord,
    #[serde(default)]
    pub seed_objects: BTreeMap<String, SeedObjectRecord>,
    /// Block index to forced kind.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, OverrideRecord>,
    pub samples: Vec<SampleRecord>,
}

/// A demonstration together with its block-kind overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct DemoFile {
    pub demo: Demonstration,
    pub overrides: BTreeMap<usize, KindOverride>,
}

impl DemoRecord {
    pub fn new(demo: &Demonstration, overrides: &BTreeMap<usize, KindOverride>) -> Self {
        Self {
            format: DEMO_FORMAT.into(),
            task_id: demo.task_id().into(),
            arm_bases: demo.arm_bases().into(),
            seed_objects: demo.seed_objects().iter().map(|(k, v)| (k.clone(), v.into())).collect(),
            overrides: overrides.iter().map(|(k, v)| (*k, v.into())).collect(),
            samples: demo.samples().iter().map(|s| SampleRecord::new(s, None)).collect(),
        }
    }

    pub fn to_demo(&self, path: &Path) -> Result<DemoFile, FormatError> {
        if self.format != DEMO_FORMAT {
            return Err(FormatError::invalid(path, format!("unsupported format `{}`, expected `{DEMO_FORMAT}`", self.format)));
        }
        let bases = self.arm_bases.to_bases(path)?;
        let seed_objects = self
            .seed_objects
            .iter()
            .map(|(id, o)| Ok((id.clone(), o.to_seed(path, id)?)))
            .collect::<Result<BTreeMap<_, _>, FormatError>>()?;
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| s.to_sample(path, i))
            .collect::<Result<Vec<_>, _>>()?;
        let demo = Demonstration::new(self.task_id.clone(), samples, seed_objects, bases)
            .map_err(|e| FormatError::invalid(path, e.to_string()))?;
        Ok(DemoFile {
            demo,
            overrides: self.overrides.iter().map(|(k, v)| (*k, v.into())).collect(),
        })
    }
}

pub fn load_demo(path: &Path) -> Result<DemoFile, FormatError> {
    read_json::<DemoRecord>(path)?.to_demo(path)
}

pub fn save_demo(path: &Path, demo: &Demonstration, overrides: &BTreeMap<usize, KindOverride>) -> Result<(), FormatError> {
    write_json(path, &DemoRecord::new(demo, overrides))
}
