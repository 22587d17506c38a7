//! Scene model and grid-based scene enumeration.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{RigidPose, Rotation, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("role `{role}`: grid must have at least one row and one column")]
    EmptyGrid { role: String },
    #[error("role `{role}`: orientation set is empty")]
    NoOrientations { role: String },
    #[error("role `{role}`: instance `{instance}` has non-positive dimensions")]
    BadDims { role: String, instance: String },
    #[error("duplicate role object id `{0}`")]
    DuplicateRole(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(&'static str),
}

/// Primitive object geometry, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectShape {
    /// Box with length `l` along its local x, width `w` along y, height `h`.
    Box { l: f64, w: f64, h: f64 },
    /// Upright cylinder.
    Cylinder { radius: f64, height: f64 },
}

impl ObjectShape {
    pub fn height(&self) -> f64 {
        match *self {
            ObjectShape::Box { h, .. } => h,
            ObjectShape::Cylinder { height, .. } => height,
        }
    }

    /// Half extents of the bounding box in the object frame.
    pub fn half_extents(&self) -> Vec3 {
        match *self {
            ObjectShape::Box { l, w, h } => Vec3::new(0.5 * l, 0.5 * w, 0.5 * h),
            ObjectShape::Cylinder { radius, height } => Vec3::new(radius, radius, 0.5 * height),
        }
    }

    pub fn is_valid(&self) -> bool {
        let e = self.half_extents();
        e.x > 0.0 && e.y > 0.0 && e.z > 0.0 && e.is_finite()
    }
}

/// An object placed in the world. `pose` is the volume center.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: String,
    pub instance_id: String,
    pub shape: ObjectShape,
    pub pose: RigidPose,
}

impl SceneObject {
    /// Object resting on the plane `z = table_z` at `(x, y)` with the given yaw.
    pub fn resting(
        id: impl Into<String>,
        instance_id: impl Into<String>,
        shape: ObjectShape,
        x: f64,
        y: f64,
        yaw: f64,
        table_z: f64,
    ) -> Self {
        Self {
            id: id.into(),
            instance_id: instance_id.into(),
            shape,
            pose: RigidPose::new(Rotation::from_yaw(yaw), Vec3::new(x, y, table_z + 0.5 * shape.height())),
        }
    }
}

/// Axis-aligned rectangle on the table plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn centered(size_x: f64, size_y: f64) -> Self {
        Self {
            x_min: -0.5 * size_x,
            x_max: 0.5 * size_x,
            y_min: -0.5 * size_y,
            y_max: 0.5 * size_y,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn size_x(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn size_y(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn is_valid(&self) -> bool {
        self.x_max > self.x_min && self.y_max > self.y_min
    }
}

/// Placement region of a role. The left arm sits on the `-x` edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Whole,
    LeftHalf,
    RightHalf,
}

impl Region {
    pub fn rect(self, ws: &Rect) -> Rect {
        let mid = 0.5 * (ws.x_min + ws.x_max);
        match self {
            Region::Whole => *ws,
            Region::LeftHalf => Rect { x_max: mid, ..*ws },
            Region::RightHalf => Rect { x_min: mid, ..*ws },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub id: String,
    pub shape: ObjectShape,
}

/// One manipulated object and its placement variations.
#[derive(Debug, Clone, PartialEq)]
pub struct RoleSpec {
    /// Matches the seed-object id of the demonstration.
    pub object_id: String,
    pub region: Region,
    /// Cells along x.
    pub rows: usize,
    /// Cells along y.
    pub cols: usize,
    pub instances: Vec<InstanceSpec>,
    /// Yaw angles, radians.
    pub orientations: Vec<f64>,
}

impl RoleSpec {
    pub fn variant_count(&self) -> usize {
        self.instances.len() * self.orientations.len() * self.rows * self.cols
    }

    /// Centroid of cell `(row, col)` within `ws`.
    pub fn cell_center(&self, ws: &Rect, row: usize, col: usize) -> (f64, f64) {
        let r = self.region.rect(ws);
        let dx = r.size_x() / self.rows as f64;
        let dy = r.size_y() / self.cols as f64;
        (r.x_min + (row as f64 + 0.5) * dx, r.y_min + (col as f64 + 0.5) * dy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub name: String,
    pub workspace: Rect,
    pub table_z: f64,
    pub roles: Vec<RoleSpec>,
    /// Uniform per-axis placement jitter bound, meters.
    pub jitter: f64,
    /// Size-offset scale for endpoint adaptation.
    pub lambda: f64,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if !self.workspace.is_valid() {
            return Err(SpecError::InvalidParam("workspace rectangle is empty"));
        }
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(SpecError::InvalidParam("jitter must be finite and non-negative"));
        }
        if !(self.lambda > 0.0 && self.lambda <= 2.0) {
            return Err(SpecError::InvalidParam("lambda must lie in (0, 2]"));
        }
        let mut seen = BTreeMap::new();
        for role in &self.roles {
            if seen.insert(role.object_id.clone(), ()).is_some() {
                return Err(SpecError::DuplicateRole(role.object_id.clone()));
            }
            if role.rows == 0 || role.cols == 0 {
                return Err(SpecError::EmptyGrid {
                    role: role.object_id.clone(),
                });
            }
            if role.orientations.is_empty() {
                return Err(SpecError::NoOrientations {
                    role: role.object_id.clone(),
                });
            }
            for inst in &role.instances {
                if !inst.shape.is_valid() {
                    return Err(SpecError::BadDims {
                        role: role.object_id.clone(),
                        instance: inst.id.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Closed-form number of scenes: the product of per-role variant counts
    /// (zero when there are no roles).
    pub fn scene_count(&self) -> usize {
        if self.roles.is_empty() {
            return 0;
        }
        self.roles.iter().map(RoleSpec::variant_count).product()
    }
}

/// Grid placement of one role in a scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneInstance {
    pub index: usize,
    pub scene_seed: u64,
    pub workspace: Rect,
    pub objects: BTreeMap<String, SceneObject>,
    pub cells: BTreeMap<String, CellIndex>,
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-scene seed derived from the master seed and the scene index.
pub fn scene_seed(master_seed: u64, index: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(index as u64))
}

/// Builds scene `index` of the enumeration. Scenes are ordered with the
/// first role most significant; within a role the order is instance, then
/// orientation, then cell (row-major).
pub fn scene_at(spec: &TaskSpec, master_seed: u64, index: usize) -> SceneInstance {
    let seed = scene_seed(master_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rem = index;
    let mut picks = Vec::with_capacity(spec.roles.len());
    for role in spec.roles.iter().rev() {
        let n = role.variant_count();
        picks.push(rem % n);
        rem /= n;
    }
    picks.reverse();

    let mut objects = BTreeMap::new();
    let mut cells = BTreeMap::new();
    for (role, pick) in spec.roles.iter().zip(picks) {
        let n_cells = role.rows * role.cols;
        let cell = pick % n_cells;
        let orient = (pick / n_cells) % role.orientations.len();
        let inst = pick / (n_cells * role.orientations.len());
        let (row, col) = (cell / role.cols, cell % role.cols);
        let (mut x, mut y) = role.cell_center(&spec.workspace, row, col);
        if spec.jitter > 0.0 {
            x += rng.random_range(-spec.jitter..=spec.jitter);
            y += rng.random_range(-spec.jitter..=spec.jitter);
        }
        let instance = &role.instances[inst];
        objects.insert(
            role.object_id.clone(),
            SceneObject::resting(
                role.object_id.clone(),
                instance.id.clone(),
                instance.shape,
                x,
                y,
                role.orientations[orient],
                spec.table_z,
            ),
        );
        cells.insert(role.object_id.clone(), CellIndex { row, col });
    }
    SceneInstance {
        index,
        scene_seed: seed,
        workspace: spec.workspace,
        objects,
        cells,
    }
}

/// All scenes of `spec`, in enumeration order.
pub fn enumerate_scenes(spec: &TaskSpec, master_seed: u64) -> Vec<SceneInstance> {
    (0..spec.scene_count()).map(|i| scene_at(spec, master_seed, i)).collect()
}
