use std::path::Path;

use demosyn_core::synthesis::{InstanceSpec, ObjectShape, Rect, Region, RoleSpec, SceneObject, TaskSpec};
use serde::{Deserialize, Serialize};

use super::{read_json, FormatError, PoseRecord};

pub const TASK_FORMAT: &str = "demosyn-task/1";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeRecord {
    Box { l: f64, w: f64, h: f64 },
    Cylinder { radius: f64, height: f64 },
}

impl From<ObjectShape> for ShapeRecord {
    fn from(s: ObjectShape) -> Self {
        match s {
            ObjectShape::Box { l, w, h } => ShapeRecord::Box { l, w, h },
            ObjectShape::Cylinder { radius, height } => ShapeRecord::Cylinder { radius, height },
        }
    }
}

impl From<ShapeRecord> for ObjectShape {
    fn from(s: ShapeRecord) -> Self {
        match s {
            ShapeRecord::Box { l, w, h } => ObjectShape::Box { l, w, h },
            ShapeRecord::Cylinder { radius, height } => ObjectShape::Cylinder { radius, height },
        }
    }
}

/// Object placement; the pose is the center of the object's volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObjectRecord {
    pub id: String,
    pub instance_id: String,
    pub shape: ShapeRecord,
    pub pose: PoseRecord,
}

impl From<&SceneObject> for SceneObjectRecord {
    fn from(o: &SceneObject) -> Self {
        Self {
            id: o.id.clone(),
            instance_id: o.instance_id.clone(),
            shape: o.shape.into(),
            pose: (&o.pose).into(),
        }
    }
}

impl SceneObjectRecord {
    pub fn to_object(&self, path: &Path) -> Result<SceneObject, FormatError> {
        let shape: ObjectShape = self.shape.into();
        if !shape.is_valid() {
            return Err(FormatError::invalid(path, format!("object `{}`: dimensions must be positive", self.id)));
        }
        Ok(SceneObject {
            id: self.id.clone(),
            instance_id: self.instance_id.clone(),
            shape,
            pose: self.pose.to_pose_at(path, &format!("object `{}` pose", self.id))?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionRecord {
    Whole,
    LeftHalf,
    RightHalf,
}

impl From<Region> for RegionRecord {
    fn from(r: Region) -> Self {
        match r {
            Region::Whole => RegionRecord::Whole,
            Region::LeftHalf => RegionRecord::LeftHalf,
            Region::RightHalf => RegionRecord::RightHalf,
        }
    }
}

impl From<RegionRecord> for Region {
    fn from(r: RegionRecord) -> Self {
        match r {
            RegionRecord::Whole => Region::Whole,
            RegionRecord::LeftHalf => Region::LeftHalf,
            RegionRecord::RightHalf => Region::RightHalf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub id: String,
    pub shape: ShapeRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleRecord {
    pub object_id: String,
    pub region: RegionRecord,
    pub rows: usize,
    pub cols: usize,
    pub instances: Vec<InstanceRecord>,
    /// Yaw angles in radians.
    pub orientations: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectRecord {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Task specification file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub format: String,
    pub name: String,
    pub workspace: RectRecord,
    pub table_z: f64,
    pub jitter: f64,
    pub lambda: f64,
    pub roles: Vec<RoleRecord>,
}

impl From<&TaskSpec> for TaskRecord {
    fn from(s: &TaskSpec) -> Self {
        let w = s.workspace;
        Self {
            format: TASK_FORMAT.into(),
            name: s.name.clone(),
            workspace: RectRecord {
                x_min: w.x_min,
                x_max: w.x_max,
                y_min: w.y_min,
                y_max: w.y_max,
            },
            table_z: s.table_z,
            jitter: s.jitter,
            lambda: s.lambda,
            roles: s
                .roles
                .iter()
                .map(|r| RoleRecord {
                    object_id: r.object_id.clone(),
                    region: r.region.into(),
                    rows: r.rows,
                    cols: r.cols,
                    instances: r
                        .instances
                        .iter()
                        .map(|i| InstanceRecord {
                            id: i.id.clone(),
                            shape: i.shape.into(),
                        })
                        .collect(),
                    orientations: r.orientations.clone(),
                })
                .collect(),
        }
    }
}

impl TaskRecord {
    pub fn to_spec(&self, path: &Path) -> Result<TaskSpec, FormatError> {
        if self.format != TASK_FORMAT {
            return Err(FormatError::invalid(path, format!("unsupported format `{}`, expected `{TASK_FORMAT}`", self.format)));
        }
        let w = self.workspace;
        let spec = TaskSpec {
            name: self.name.clone(),
            workspace: Rect {
                x_min: w.x_min,
                x_max: w.x_max,
                y_min: w.y_min,
                y_max: w.y_max,
            },
            table_z: self.table_z,
            roles: self
                .roles
                .iter()
                .map(|r| RoleSpec {
                    object_id: r.object_id.clone(),
                    region: r.region.into(),
                    rows: r.rows,
                    cols: r.cols,
                    instances: r
                        .instances
                        .iter()
                        .map(|i| InstanceSpec {
                            id: i.id.clone(),
                            shape: i.shape.into(),
                        })
                        .collect(),
                    orientations: r.orientations.clone(),
                })
                .collect(),
            jitter: self.jitter,
            lambda: self.lambda,
        };
        spec.validate().map_err(|e| FormatError::invalid(path, e.to_string()))?;
        Ok(spec)
    }
}

pub fn load_task(path: &Path) -> Result<TaskSpec, FormatError> {
    read_json::<TaskRecord>(path)?.to_spec(path)
}
