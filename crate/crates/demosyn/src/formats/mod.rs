//! On-disk formats. Every text format is JSON; field names and units are
//! listed in `FORMAT.md`. Records convert to and from the core types.

mod arm;
mod camera;
mod demo;
mod raster;
mod task;
mod trajectory;

pub use arm::*;
pub use camera::*;
pub use demo::*;
pub use raster::*;
pub use task::*;
pub use trajectory::*;

use std::fs;
use std::path::{Path, PathBuf};

use demosyn_core::geometry::{RigidPose, Rotation, Vec3};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}, column {column} (byte {offset}): {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        offset: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

impl FormatError {
    pub fn invalid(path: &Path, message: impl Into<String>) -> Self {
        FormatError::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

/// Byte offset of 1-based `(line, column)` in `text`.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses JSON text, reporting syntax errors with line, column and byte offset.
pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(path, &text)
}

/// Pretty JSON with a trailing newline.
pub fn to_json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    fs::write(path, to_json_text(value)).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Position in meters and unit quaternion `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseRecord {
    pub position: [f64; 3],
    pub quaternion: [f64; 4],
}

impl From<&RigidPose> for PoseRecord {
    fn from(p: &RigidPose) -> Self {
        Self {
            position: p.translation.to_array(),
            quaternion: p.rotation.to_wxyz(),
        }
    }
}

impl PoseRecord {
    pub fn to_pose(&self) -> Option<RigidPose> {
        let [w, x, y, z] = self.quaternion;
        let rotation = Rotation::from_stored_quaternion(w, x, y, z)?;
        let t = Vec3::from_array(self.position);
        t.is_finite().then_some(RigidPose::new(rotation, t))
    }

    pub fn to_pose_at(&self, path: &Path, what: &str) -> Result<RigidPose, FormatError> {
        self.to_pose()
            .ok_or_else(|| FormatError::invalid(path, format!("{what}: non-finite position or zero quaternion")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_count_bytes() {
        let text = "{\n  \"a\": 1,\n  \"b\"";
        assert_eq!(byte_offset(text, 1, 1), 0);
        assert_eq!(byte_offset(text, 3, 3), 14);
    }

    #[test]
    fn pose_round_trip_is_exact() {
        let p = RigidPose::new(
            Rotation::from_axis_angle(Vec3::new(0.3, -0.2, 0.9), 2.1),
            Vec3::new(0.1, -0.25, 0.333),
        );
        let rec = PoseRecord::from(&p);
        let text = serde_json::to_string(&rec).unwrap();
        let back: PoseRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_pose().unwrap(), p);
    }
}
