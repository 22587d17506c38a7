//! Analytic top-down ray casting of primitive objects into masks and depth.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::geometry::{CameraModel, RigidPose, Vec3};
use crate::perception::{DepthImage, ObjectMask};
use crate::synthesis::{ObjectShape, SceneInstance, SceneObject};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("objects outside the camera frustum: {0:?}")]
    OutOfFrustum(Vec<String>),
}

/// Scene depth (table included) and one mask per object.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub depth: DepthImage,
    pub masks: BTreeMap<String, ObjectMask>,
}

impl Observation {
    /// Mask and depth pair for `id`.
    pub fn view(&self, id: &str) -> Option<(&ObjectMask, &DepthImage)> {
        self.masks.get(id).map(|m| (m, &self.depth))
    }
}

/// Nearest positive ray parameter hitting the solid box `[-h, h]`.
fn ray_box(o: Vec3, d: Vec3, h: Vec3) -> Option<f64> {
    let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
    for k in 0..3 {
        if d[k].abs() < 1e-300 {
            if o[k] < -h[k] || o[k] > h[k] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d[k];
        let (mut lo, mut hi) = ((-h[k] - o[k]) * inv, (h[k] - o[k]) * inv);
        if lo > hi {
            core::mem::swap(&mut lo, &mut hi);
        }
        t0 = t0.max(lo);
        t1 = t1.min(hi);
        if t0 > t1 {
            return None;
        }
    }
    Some(t0)
}

/// Nearest positive hit on an upright cylinder centered at the origin.
fn ray_cylinder(o: Vec3, d: Vec3, r: f64, half_h: f64) -> Option<f64> {
    let mut best = f64::INFINITY;
    let a = d.x * d.x + d.y * d.y;
    if a > 1e-300 {
        let b = 2.0 * (o.x * d.x + o.y * d.y);
        let c = o.x * o.x + o.y * o.y - r * r;
        let disc = b * b - 4.0 * a * c;
        if disc >= 0.0 {
            let s = disc.sqrt();
            for t in [(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)] {
                if t >= 0.0 && (o.z + t * d.z).abs() <= half_h {
                    best = best.min(t);
                }
            }
        }
    }
    if d.z.abs() > 1e-300 {
        for zc in [half_h, -half_h] {
            let t = (zc - o.z) / d.z;
            let (x, y) = (o.x + t * d.x, o.y + t * d.y);
            if t >= 0.0 && x * x + y * y <= r * r {
                best = best.min(t);
            }
        }
    }
    best.is_finite().then_some(best)
}

/// Ray parameter of the first hit of `origin + t·dir` with `obj`.
pub fn ray_hit(obj: &SceneObject, origin: Vec3, dir: Vec3) -> Option<f64> {
    let inv = obj.pose.inverse();
    local_hit(obj.shape, inv.transform_point(origin), inv.transform_vector(dir))
}

/// Hit against a shape centered at the origin of its own frame.
fn local_hit(shape: ObjectShape, o: Vec3, d: Vec3) -> Option<f64> {
    match shape {
        ObjectShape::Box { .. } => ray_box(o, d, shape.half_extents()),
        ObjectShape::Cylinder { radius, height } => ray_cylinder(o, d, radius, 0.5 * height),
    }
}

fn bounding_corners(obj: &SceneObject) -> [Vec3; 8] {
    let h = obj.shape.half_extents();
    let mut out = [Vec3::ZERO; 8];
    for (i, c) in out.iter_mut().enumerate() {
        let s = |bit: usize| if i & bit != 0 { 1.0 } else { -1.0 };
        *c = obj.pose.transform_point(Vec3::new(s(1) * h.x, s(2) * h.y, s(4) * h.z));
    }
    out
}

/// Pixel rectangle `(u0, v0, u1, v1)` (inclusive) covering `obj`, or `None`
/// when any part of it leaves the image.
fn pixel_bounds(obj: &SceneObject, cam: &CameraModel) -> Option<(u32, u32, u32, u32)> {
    let (mut u0, mut v0, mut u1, mut v1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in bounding_corners(obj) {
        let (u, v, _) = cam.project(c).ok()?;
        if !cam.contains_pixel(u, v) {
            return None;
        }
        u0 = u0.min(u);
        v0 = v0.min(v);
        u1 = u1.max(u);
        v1 = v1.max(v);
    }
    let clamp_u = |x: f64| x.round().clamp(0.0, cam.width as f64 - 1.0) as u32;
    let clamp_v = |x: f64| x.round().clamp(0.0, cam.height as f64 - 1.0) as u32;
    Some((clamp_u(u0), clamp_v(v0), clamp_u(u1), clamp_v(v1)))
}

/// Renders `objects` resting above the plane `z = table_z`. Each mask holds
/// the pixels whose nearest surface belongs to that object; depth is the
/// optical-axis distance of the nearest surface, table included.
pub fn render_objects(objects: &[&SceneObject], cam: &CameraModel, table_z: f64) -> Result<Observation, RenderError> {
    let bounds: Vec<_> = objects.iter().map(|o| pixel_bounds(o, cam)).collect();
    let outside: Vec<String> = objects
        .iter()
        .zip(&bounds)
        .filter(|(_, b)| b.is_none())
        .map(|(o, _)| o.id.clone())
        .collect();
    if !outside.is_empty() {
        return Err(RenderError::OutOfFrustum(outside));
    }

    let (w, h) = (cam.width, cam.height);
    let origin = cam.extrinsic.translation;
    let ray = |u: u32, v: u32| cam.extrinsic.transform_vector(cam.ray_camera(u as f64, v as f64));
    // World z of the camera ray is affine in the pixel coordinates.
    let r = cam.extrinsic.rotation.to_matrix().0[2];
    let rise = table_z - origin.z;
    let slope = r[0] / cam.fx;
    let row_base = |v: u32| r[1] * ((f64::from(v) - cam.cy) / cam.fy) + r[2] - slope * cam.cx;
    let table_depth = |base: f64, u: u32| {
        let t = rise / (base + slope * f64::from(u));
        (t > 0.0 && t.is_finite()).then_some(t)
    };
    let mut values = alloc::vec![0.0f32; w as usize * h as usize];
    for (v, row) in values.chunks_exact_mut(w as usize).enumerate() {
        let base = row_base(v as u32);
        for (u, out) in row.iter_mut().enumerate() {
            *out = table_depth(base, u as u32).map_or(0.0, |t| t as f32);
        }
    }

    let mut masks: Vec<ObjectMask> = objects.iter().map(|_| ObjectMask::empty(w, h)).collect();
    let union = bounds.iter().flatten().copied().reduce(|a, b| (a.0.min(b.0), a.1.min(b.1), a.2.max(b.2), a.3.max(b.3)));
    if let Some((u0, v0, u1, v1)) = union {
        // Nearest object hit per pixel, restricted to the region objects cover.
        let rw = (u1 - u0 + 1) as usize;
        let mut nearest = alloc::vec![(f64::INFINITY, usize::MAX); rw * (v1 - v0 + 1) as usize];
        for (k, (obj, b)) in objects.iter().zip(&bounds).enumerate() {
            let (bu0, bv0, bu1, bv1) = b.expect("checked above");
            let inv = obj.pose.inverse();
            let o = inv.transform_point(origin);
            for v in bv0..=bv1 {
                for u in bu0..=bu1 {
                    if let Some(t) = local_hit(obj.shape, o, inv.transform_vector(ray(u, v))) {
                        let cell = &mut nearest[(v - v0) as usize * rw + (u - u0) as usize];
                        if t > 0.0 && t < cell.0 {
                            *cell = (t, k);
                        }
                    }
                }
            }
        }
        for v in v0..=v1 {
            for u in u0..=u1 {
                let (t, k) = nearest[(v - v0) as usize * rw + (u - u0) as usize];
                if k != usize::MAX && table_depth(row_base(v), u).is_none_or(|floor| t < floor) {
                    values[(v * w + u) as usize] = t as f32;
                    masks[k].set(u, v, true);
                }
            }
        }
    }
    let masks = objects.iter().map(|o| o.id.clone()).zip(masks).collect();
    Ok(Observation {
        depth: DepthImage::new(w, h, values).expect("sized from camera"),
        masks,
    })
}

/// Renders every object of a scene.
pub fn render_observation(scene: &SceneInstance, cam: &CameraModel, table_z: f64) -> Result<Observation, RenderError> {
    let objs: Vec<&SceneObject> = scene.objects.values().collect();
    render_objects(&objs, cam, table_z)
}

/// Camera looking straight down from `height` above the table center, with
/// image `+u` along world `+x` and `+v` along world `-y`.
pub fn top_down_camera(width: u32, height: u32, focal: f64, mount_height: f64, table_z: f64) -> CameraModel {
    let extrinsic = RigidPose::new(
        crate::geometry::Rotation::from_axis_angle(Vec3::X, core::f64::consts::PI),
        Vec3::new(0.0, 0.0, table_z + mount_height),
    );
    CameraModel::new(
        focal,
        focal,
        0.5 * (width as f64 - 1.0),
        0.5 * (height as f64 - 1.0),
        width,
        height,
        extrinsic,
    )
    .expect("valid top-down camera")
}
