use std::path::Path;

use demosyn_core::geometry::CameraModel;
use serde::{Deserialize, Serialize};

use super::{read_json, write_json, FormatError, PoseRecord};

pub const CAMERA_FORMAT: &str = "demosyn-camera/1";

/// Pinhole intrinsics in pixels plus the camera-to-world pose. The camera
/// looks along its `+z` axis; integer pixel coordinates are pixel centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRecord {
    pub format: String,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub extrinsic: PoseRecord,
}

impl From<&CameraModel> for CameraRecord {
    fn from(c: &CameraModel) -> Self {
        Self {
            format: CAMERA_FORMAT.into(),
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            extrinsic: (&c.extrinsic).into(),
        }
    }
}

impl CameraRecord {
    pub fn to_model(&self, path: &Path) -> Result<CameraModel, FormatError> {
        if self.format != CAMERA_FORMAT {
            return Err(FormatError::invalid(path, format!("unsupported format `{}`, expected `{CAMERA_FORMAT}`", self.format)));
        }
        let extrinsic = self.extrinsic.to_pose_at(path, "extrinsic")?;
        CameraModel::new(self.fx, self.fy, self.cx, self.cy, self.width, self.height, extrinsic)
            .map_err(|e| FormatError::invalid(path, e.to_string()))
    }
}

pub fn load_camera(path: &Path) -> Result<CameraModel, FormatError> {
    read_json::<CameraRecord>(path)?.to_model(path)
}

pub fn save_camera(path: &Path, cam: &CameraModel) -> Result<(), FormatError> {
    write_json(path, &CameraRecord::from(cam))
}
