//! Object state estimation from a binary mask and a depth image: centroid,
//! principal axes, pose and oriented bounding-box dimensions.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::geometry::{principal_axes_full, principal_yaw, wrap_angle, CameraModel, GeometryError, RigidPose, Rotation, Vec3};
use crate::synthesis::{ObjectShape, SceneObject};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerceptionError {
    #[error("mask has no set pixels")]
    EmptyMask,
    #[error("image size mismatch: mask {mask_w}x{mask_h}, depth {depth_w}x{depth_h}, camera {cam_w}x{cam_h}")]
    SizeMismatch {
        mask_w: u32,
        mask_h: u32,
        depth_w: u32,
        depth_h: u32,
        cam_w: u32,
        cam_h: u32,
    },
    #[error("raster of {width}x{height} needs {expected} values, got {got}")]
    BadRaster { width: u32, height: u32, expected: usize, got: usize },
    #[error("invalid depth {depth} at pixel ({u}, {v})")]
    InvalidDepth { u: u32, v: u32, depth: f64 },
    #[error("need at least {needed} masked pixels, got {got}")]
    TooFewPixels { needed: usize, got: usize },
    #[error("degenerate point cloud (eigenvalue ratio {ratio:.4})")]
    DegenerateCloud { ratio: f64 },
    #[error(transparent)]
    Geometry(GeometryError),
}

impl From<GeometryError> for PerceptionError {
    fn from(e: GeometryError) -> Self {
        match e {
            GeometryError::DegenerateCloud { ratio } => PerceptionError::DegenerateCloud { ratio },
            other => PerceptionError::Geometry(other),
        }
    }
}

/// Row-major binary occupancy raster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl ObjectMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, PerceptionError> {
        let expected = width as usize * height as usize;
        if bits.len() != expected {
            return Err(PerceptionError::BadRaster {
                width,
                height,
                expected,
                got: bits.len(),
            });
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            bits: alloc::vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut m = Self::empty(width, height);
        for v in 0..height {
            for u in 0..width {
                m.set(u, v, f(u, v));
            }
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, u: u32, v: u32) -> bool {
        self.bits[(v * self.width + u) as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, on: bool) {
        let w = self.width;
        self.bits[(v * w + u) as usize] = on;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn iter_set(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        let w = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(move |(i, _)| (i as u32 % w, i as u32 / w))
    }
}

/// Row-major depth raster in meters along the optical axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthImage {
    width: u32,
    height: u32,
    values: Vec<f32>,
}

impl DepthImage {
    pub fn new(width: u32, height: u32, values: Vec<f32>) -> Result<Self, PerceptionError> {
        let expected = width as usize * height as usize;
        if values.len() != expected {
            return Err(PerceptionError::BadRaster {
                width,
                height,
                expected,
                got: values.len(),
            });
        }
        Ok(Self { width, height, values })
    }

    pub fn filled(width: u32, height: u32, depth: f32) -> Self {
        Self {
            width,
            height,
            values: alloc::vec![depth; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn get(&self, u: u32, v: u32) -> f32 {
        self.values[(v * self.width + u) as usize]
    }

    pub fn set(&mut self, u: u32, v: u32, d: f32) {
        let w = self.width;
        self.values[(v * w + u) as usize] = d;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PoseMode {
    /// Yaw-only rotation from the top surface projected onto the table.
    #[default]
    Planar,
    /// PCA over all back-projected points.
    Full3D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CentroidMode {
    /// Mean of the back-projected 3D points.
    #[default]
    BackProjected,
    /// Back-projection of the mean `(u, v, d)` triple.
    PixelDepthMean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerceptionParams {
    pub mode: PoseMode,
    pub centroid: CentroidMode,
    /// Sign reference for the first principal axis.
    pub reference_axis: Vec3,
    /// Height of the supporting plane in world z.
    pub table_z: f64,
    /// Points within this distance below the highest masked point form the
    /// top surface used in planar mode.
    pub top_band: f64,
    /// Largest fraction of masked pixels with invalid depth that is dropped
    /// instead of failing.
    pub max_hole_fraction: f64,
}

impl Default for PerceptionParams {
    fn default() -> Self {
        Self {
            mode: PoseMode::Planar,
            centroid: CentroidMode::BackProjected,
            reference_axis: Vec3::X,
            table_z: 0.0,
            top_band: 0.003,
            max_hole_fraction: 0.1,
        }
    }
}

/// Bounding-box dimensions in the principal frame, `l ≥ w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDims {
    pub l: f64,
    pub w: f64,
    pub h: f64,
}

impl BoxDims {
    pub fn new(l: f64, w: f64, h: f64) -> Self {
        Self { l, w, h }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.l, self.w, self.h]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectEstimate {
    /// World pose. In planar mode the translation is the top-surface center
    /// and the rotation is a yaw; in 3D mode it is the point-cloud mean.
    pub pose: RigidPose,
    pub bbox: BoxDims,
    pub pixel_count: usize,
    pub planar: bool,
    /// Orientation could not be resolved and was set to the identity.
    pub degenerate: bool,
    /// Masked point with the lowest world z.
    pub lowest_point: Vec3,
}

impl ObjectEstimate {
    /// Oriented box occupied by the object: center pose and half extents.
    pub fn volume(&self) -> (RigidPose, Vec3) {
        let half = Vec3::new(self.bbox.l, self.bbox.w, self.bbox.h) * 0.5;
        if self.planar {
            let center = self.pose.translation - Vec3::Z * (0.5 * self.bbox.h);
            (RigidPose::new(self.pose.rotation, center), half)
        } else {
            (self.pose, half)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepresentativePolicy {
    Centroid,
    LowestContact,
}

pub fn representative_point(estimate: &ObjectEstimate, policy: RepresentativePolicy) -> Vec3 {
    match policy {
        RepresentativePolicy::Centroid => estimate.pose.translation,
        RepresentativePolicy::LowestContact => estimate.lowest_point,
    }
}

#[derive(Debug, Clone, Copy)]
struct MaskedPoint {
    u: f64,
    v: f64,
    d: f64,
    p: Vec3,
}

fn check_sizes(mask: &ObjectMask, depth: &DepthImage, cam: &CameraModel) -> Result<(), PerceptionError> {
    if mask.width != depth.width || mask.height != depth.height || mask.width != cam.width || mask.height != cam.height {
        return Err(PerceptionError::SizeMismatch {
            mask_w: mask.width,
            mask_h: mask.height,
            depth_w: depth.width,
            depth_h: depth.height,
            cam_w: cam.width,
            cam_h: cam.height,
        });
    }
    Ok(())
}

fn masked_points(
    mask: &ObjectMask,
    depth: &DepthImage,
    cam: &CameraModel,
    max_hole_fraction: f64,
) -> Result<Vec<MaskedPoint>, PerceptionError> {
    check_sizes(mask, depth, cam)?;
    let mut pts = Vec::new();
    let mut holes = 0usize;
    let mut first_hole = None;
    for (u, v) in mask.iter_set() {
        let d = depth.get(u, v) as f64;
        if !(d.is_finite() && d > 0.0) {
            holes += 1;
            first_hole.get_or_insert((u, v, d));
            continue;
        }
        let (uf, vf) = (u as f64, v as f64);
        let p = cam.backproject(uf, vf, d)?;
        pts.push(MaskedPoint { u: uf, v: vf, d, p });
    }
    let total = pts.len() + holes;
    if total == 0 {
        return Err(PerceptionError::EmptyMask);
    }
    if let Some((u, v, depth)) = first_hole {
        if pts.is_empty() || holes as f64 >= max_hole_fraction * total as f64 {
            return Err(PerceptionError::InvalidDepth { u, v, depth });
        }
    }
    Ok(pts)
}

fn mean_point(pts: &[MaskedPoint]) -> Vec3 {
    let mut c = Vec3::ZERO;
    for p in pts {
        c += p.p;
    }
    c / pts.len() as f64
}

fn pixel_depth_mean(pts: &[MaskedPoint], cam: &CameraModel) -> Result<Vec3, PerceptionError> {
    let n = pts.len() as f64;
    let (mut u, mut v, mut d) = (0.0, 0.0, 0.0);
    for p in pts {
        u += p.u;
        v += p.v;
        d += p.d;
    }
    Ok(cam.backproject(u / n, v / n, d / n)?)
}

/// Object centroid from its masked pixels.
pub fn estimate_centroid(
    mask: &ObjectMask,
    depth: &DepthImage,
    cam: &CameraModel,
    mode: CentroidMode,
) -> Result<Vec3, PerceptionError> {
    let pts = masked_points(mask, depth, cam, PerceptionParams::default().max_hole_fraction)?;
    match mode {
        CentroidMode::BackProjected => Ok(mean_point(&pts)),
        CentroidMode::PixelDepthMean => pixel_depth_mean(&pts, cam),
    }
}

/// Flips `yaw` by π when its heading points away from `reference`.
fn orient_yaw(yaw: f64, reference: Vec3) -> f64 {
    let (s, c) = yaw.sin_cos();
    if c * reference.x + s * reference.y < 0.0 {
        wrap_angle(yaw + core::f64::consts::PI)
    } else {
        wrap_angle(yaw)
    }
}

fn extents(points: impl Iterator<Item = Vec3> + Clone, center: Vec3, axis: Vec3) -> f64 {
    let (lo, hi) = points.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let s = (p - center).dot(axis);
        (lo.min(s), hi.max(s))
    });
    (hi - lo).max(0.0)
}

fn lowest(pts: &[MaskedPoint]) -> Vec3 {
    pts.iter()
        .map(|p| p.p)
        .min_by(|a, b| a.z.total_cmp(&b.z))
        .unwrap_or(Vec3::ZERO)
}

/// Full pose and box estimate. Fails with `DegenerateCloud` when the
/// footprint is near-isotropic.
pub fn estimate_pose(
    mask: &ObjectMask,
    depth: &DepthImage,
    cam: &CameraModel,
    params: &PerceptionParams,
) -> Result<ObjectEstimate, PerceptionError> {
    let pts = masked_points(mask, depth, cam, params.max_hole_fraction)?;
    if pts.len() < 3 {
        return Err(PerceptionError::TooFewPixels {
            needed: 3,
            got: pts.len(),
        });
    }
    match params.mode {
        PoseMode::Planar => planar_estimate(&pts, cam, params),
        PoseMode::Full3D => full_estimate(&pts, cam, params),
    }
}

fn planar_estimate(pts: &[MaskedPoint], cam: &CameraModel, params: &PerceptionParams) -> Result<ObjectEstimate, PerceptionError> {
    let z_top = pts.iter().map(|p| p.p.z).fold(f64::NEG_INFINITY, f64::max);
    let mut top: Vec<MaskedPoint> = pts.iter().copied().filter(|p| p.p.z >= z_top - params.top_band).collect();
    if top.len() < 3 {
        top = pts.to_vec();
    }
    let top_xyz: Vec<Vec3> = top.iter().map(|p| p.p).collect();
    let mut yaw = principal_yaw(&top_xyz, params.reference_axis)?;

    let center = match params.centroid {
        CentroidMode::BackProjected => mean_point(&top),
        CentroidMode::PixelDepthMean => pixel_depth_mean(pts, cam)?,
    };
    let mean_d = top.iter().map(|p| p.d).sum::<f64>() / top.len() as f64;
    let footprint = 0.5 * (mean_d / cam.fx + mean_d / cam.fy);
    let e1 = Vec3::new(yaw.cos(), yaw.sin(), 0.0);
    let e2 = Vec3::new(-yaw.sin(), yaw.cos(), 0.0);
    let flat = |p: Vec3| Vec3::new(p.x, p.y, 0.0);
    let c0 = flat(center);
    let mut l = extents(top_xyz.iter().map(|p| flat(*p)), c0, e1) + footprint;
    let mut w = extents(top_xyz.iter().map(|p| flat(*p)), c0, e2) + footprint;
    if w > l {
        core::mem::swap(&mut l, &mut w);
        yaw = orient_yaw(yaw + core::f64::consts::FRAC_PI_2, params.reference_axis);
    }
    let h = (z_top - params.table_z).max(0.0);
    Ok(ObjectEstimate {
        pose: RigidPose::new(Rotation::from_yaw(yaw), center),
        bbox: BoxDims::new(l, w, h),
        pixel_count: pts.len(),
        planar: true,
        degenerate: false,
        lowest_point: lowest(pts),
    })
}

fn full_estimate(pts: &[MaskedPoint], cam: &CameraModel, params: &PerceptionParams) -> Result<ObjectEstimate, PerceptionError> {
    let xyz: Vec<Vec3> = pts.iter().map(|p| p.p).collect();
    let axes = principal_axes_full(&xyz, params.reference_axis)?;
    let center = match params.centroid {
        CentroidMode::BackProjected => mean_point(pts),
        CentroidMode::PixelDepthMean => pixel_depth_mean(pts, cam)?,
    };
    let m = axes.rotation.to_matrix();
    let (mut e1, mut e2, e3) = (m.column(0), m.column(1), m.column(2));
    let mut l = extents(xyz.iter().copied(), center, e1);
    let mut w = extents(xyz.iter().copied(), center, e2);
    let h = extents(xyz.iter().copied(), center, e3);
    let mut rotation = axes.rotation;
    if w > l {
        core::mem::swap(&mut l, &mut w);
        let turn = Rotation::from_axis_angle(e3, core::f64::consts::FRAC_PI_2);
        (e1, e2) = (turn.rotate(e1), turn.rotate(e2));
        if e1.dot(params.reference_axis) < 0.0 {
            e1 = -e1;
            e2 = -e2;
        }
        rotation = Rotation::from_matrix(&crate::geometry::Mat3::from_columns(e1, e2, e3));
    }
    Ok(ObjectEstimate {
        pose: RigidPose::new(rotation, center),
        bbox: BoxDims::new(l, w, h),
        pixel_count: pts.len(),
        planar: false,
        degenerate: false,
        lowest_point: lowest(pts),
    })
}

/// Like [`estimate_pose`], but degenerate or tiny footprints fall back to an
/// identity orientation with the `degenerate` flag set.
pub fn estimate_pose_with_fallback(
    mask: &ObjectMask,
    depth: &DepthImage,
    cam: &CameraModel,
    params: &PerceptionParams,
) -> Result<ObjectEstimate, PerceptionError> {
    match estimate_pose(mask, depth, cam, params) {
        Err(PerceptionError::DegenerateCloud { .. }) | Err(PerceptionError::TooFewPixels { .. }) => {}
        other => return other,
    }
    let pts = masked_points(mask, depth, cam, params.max_hole_fraction)?;
    let (center, h) = match params.mode {
        PoseMode::Planar => {
            let z_top = pts.iter().map(|p| p.p.z).fold(f64::NEG_INFINITY, f64::max);
            let top: Vec<MaskedPoint> = pts.iter().copied().filter(|p| p.p.z >= z_top - params.top_band).collect();
            (mean_point(&top), (z_top - params.table_z).max(0.0))
        }
        PoseMode::Full3D => (mean_point(&pts), extents(pts.iter().map(|p| p.p), Vec3::ZERO, Vec3::Z)),
    };
    let lx = extents(pts.iter().map(|p| p.p), center, Vec3::X);
    let ly = extents(pts.iter().map(|p| p.p), center, Vec3::Y);
    Ok(ObjectEstimate {
        pose: RigidPose::from_translation(center),
        bbox: BoxDims::new(lx.max(ly), lx.min(ly), h),
        pixel_count: pts.len(),
        planar: params.mode == PoseMode::Planar,
        degenerate: true,
        lowest_point: lowest(&pts),
    })
}

/// The estimate a perfect planar observation of `obj` would produce: top-face
/// center, long-axis yaw signed toward `reference`, and true dimensions.
/// Cylinders get zero yaw.
pub fn ideal_estimate(obj: &SceneObject, reference: Vec3) -> ObjectEstimate {
    let center = obj.pose.translation;
    let (yaw, dims) = match obj.shape {
        ObjectShape::Box { l, w, h } => {
            let yaw = obj.pose.rotation.yaw();
            if l >= w {
                (orient_yaw(yaw, reference), BoxDims::new(l, w, h))
            } else {
                (orient_yaw(yaw + core::f64::consts::FRAC_PI_2, reference), BoxDims::new(w, l, h))
            }
        }
        ObjectShape::Cylinder { radius, height } => (0.0, BoxDims::new(2.0 * radius, 2.0 * radius, height)),
    };
    let top = center + Vec3::Z * (0.5 * dims.h);
    ObjectEstimate {
        pose: RigidPose::new(Rotation::from_yaw(yaw), top),
        bbox: dims,
        pixel_count: 0,
        planar: true,
        degenerate: matches!(obj.shape, ObjectShape::Cylinder { .. }),
        lowest_point: center - Vec3::Z * (0.5 * dims.h),
    }
}
