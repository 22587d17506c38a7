//! Capsule, oriented-box and half-space collision queries.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::{RigidPose, Vec3};

use super::arm::{ArmModel, JointConfig};
use super::KinematicsError;

/// Line-swept sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Vec3, b: Vec3, radius: f64) -> Self {
        Self { a, b, radius }
    }

    fn bounding_sphere(&self) -> (Vec3, f64) {
        ((self.a + self.b) * 0.5, 0.5 * self.a.distance(self.b) + self.radius)
    }
}

/// Oriented box: center pose and positive half extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obb {
    pub pose: RigidPose,
    pub half: Vec3,
}

impl Obb {
    pub fn new(pose: RigidPose, half: Vec3) -> Self {
        Self { pose, half }
    }

    pub fn is_valid(&self) -> bool {
        self.half.x > 0.0 && self.half.y > 0.0 && self.half.z > 0.0 && self.pose.is_finite()
    }

    /// Euclidean distance from `p` to the solid box (0 inside).
    pub fn distance_to_point(&self, p: Vec3) -> f64 {
        point_aabb_distance(self.pose.inverse().transform_point(p), self.half)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let l = self.pose.inverse().transform_point(p);
        l.x.abs() <= self.half.x && l.y.abs() <= self.half.y && l.z.abs() <= self.half.z
    }

    /// The eight corners in world coordinates.
    pub fn corners(&self) -> [Vec3; 8] {
        let h = self.half;
        let mut out = [Vec3::ZERO; 8];
        for (i, c) in out.iter_mut().enumerate() {
            let s = |bit: usize| if i & bit != 0 { 1.0 } else { -1.0 };
            *c = self.pose.transform_point(Vec3::new(s(1) * h.x, s(2) * h.y, s(4) * h.z));
        }
        out
    }

    fn axes(&self) -> [Vec3; 3] {
        let m = self.pose.rotation.to_matrix();
        [m.column(0), m.column(1), m.column(2)]
    }
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x && p.y >= self.min.y && p.z >= self.min.z && p.x <= self.max.x && p.y <= self.max.y && p.z <= self.max.z
    }
}

fn point_aabb_distance(local: Vec3, half: Vec3) -> f64 {
    let dx = (local.x.abs() - half.x).max(0.0);
    let dy = (local.y.abs() - half.y).max(0.0);
    let dz = (local.z.abs() - half.z).max(0.0);
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Closest distance between segments `p1q1` and `p2q2`.
pub fn segment_segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    const EPS: f64 = 1e-18;
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.dot(d1);
    let e = d2.dot(d2);
    let f = d2.dot(r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return p1.distance(p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(d2);
            let denom = a * e - b * b;
            let s0 = if denom > EPS * a * e { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                t = t0;
                s = s0;
            }
        }
    }
    (p1 + d1 * s).distance(p2 + d2 * t)
}

/// Slab test of segment `ab` against the box `[-half, half]`.
fn segment_hits_aabb(a: Vec3, b: Vec3, half: Vec3) -> bool {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for k in 0..3 {
        let (o, dir, h) = (a[k], d[k], half[k]);
        if dir.abs() < 1e-300 {
            if o < -h || o > h {
                return false;
            }
            continue;
        }
        let inv = 1.0 / dir;
        let (mut lo, mut hi) = ((-h - o) * inv, (h - o) * inv);
        if lo > hi {
            core::mem::swap(&mut lo, &mut hi);
        }
        t0 = t0.max(lo);
        t1 = t1.min(hi);
        if t0 > t1 {
            return false;
        }
    }
    true
}

const BOX_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

fn local_corners(h: Vec3) -> [Vec3; 8] {
    let mut out = [Vec3::ZERO; 8];
    for (i, c) in out.iter_mut().enumerate() {
        let s = |bit: usize| if i & bit != 0 { 1.0 } else { -1.0 };
        *c = Vec3::new(s(1) * h.x, s(2) * h.y, s(4) * h.z);
    }
    out
}

/// Exact distance from segment `ab` to the solid box. Zero when they
/// intersect; otherwise the minimum over the segment endpoints against the
/// box and the segment against the twelve box edges.
pub fn segment_obb_distance(a: Vec3, b: Vec3, obb: &Obb) -> f64 {
    let inv = obb.pose.inverse();
    let (la, lb) = (inv.transform_point(a), inv.transform_point(b));
    if segment_hits_aabb(la, lb, obb.half) {
        return 0.0;
    }
    let mut d = point_aabb_distance(la, obb.half).min(point_aabb_distance(lb, obb.half));
    let c = local_corners(obb.half);
    for (i, j) in BOX_EDGES {
        d = d.min(segment_segment_distance(la, lb, c[i], c[j]));
    }
    d
}

pub fn capsule_hits_obb(c: &Capsule, obb: &Obb) -> bool {
    let inv = obb.pose.inverse();
    let mid = inv.transform_point((c.a + c.b) * 0.5);
    let reach = 0.5 * c.a.distance(c.b) + c.radius;
    if point_aabb_distance(mid, obb.half) > reach {
        return false;
    }
    segment_obb_distance(c.a, c.b, obb) <= c.radius
}

pub fn capsule_hits_capsule(c: &Capsule, d: &Capsule) -> bool {
    let (ca, ra) = c.bounding_sphere();
    let (cb, rb) = d.bounding_sphere();
    if ca.distance(cb) > ra + rb {
        return false;
    }
    segment_segment_distance(c.a, c.b, d.a, d.b) <= c.radius + d.radius
}

/// Capsule reaches below the plane `z = table_z`.
pub fn capsule_hits_table(c: &Capsule, table_z: f64) -> bool {
    c.a.z.min(c.b.z) - c.radius < table_z
}

/// Separating-axis test for two oriented boxes (touching counts as overlap).
pub fn obb_overlap(a: &Obb, b: &Obb) -> bool {
    let ax = a.axes();
    let bx = b.axes();
    let t = b.pose.translation - a.pose.translation;
    let project = |o: &Obb, axes: &[Vec3; 3], n: Vec3| {
        o.half.x * axes[0].dot(n).abs() + o.half.y * axes[1].dot(n).abs() + o.half.z * axes[2].dot(n).abs()
    };
    let mut candidates: Vec<Vec3> = Vec::with_capacity(15);
    candidates.extend_from_slice(&ax);
    candidates.extend_from_slice(&bx);
    for u in ax {
        for v in bx {
            let n = u.cross(v);
            if n.norm_squared() > 1e-20 {
                candidates.push(n);
            }
        }
    }
    candidates
        .into_iter()
        .all(|n| t.dot(n).abs() <= project(a, &ax, n) + project(b, &bx, n))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionObject {
    pub id: String,
    pub obb: Obb,
}

/// Static environment of one arm query: the table half-space `z ≥ table_z`
/// is free, object boxes are obstacles, and `capsules` holds the other arm's
/// stored link capsules.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionScene {
    pub table_z: f64,
    pub objects: Vec<CollisionObject>,
    /// Region the objects are placed in.
    pub workspace: Aabb,
    pub capsules: Vec<Capsule>,
}

impl CollisionScene {
    pub fn new(table_z: f64, workspace: Aabb) -> Self {
        Self {
            table_z,
            objects: Vec::new(),
            workspace,
            capsules: Vec::new(),
        }
    }

    pub fn add_object(&mut self, id: impl Into<String>, obb: Obb) -> Result<(), KinematicsError> {
        let id = id.into();
        if !obb.is_valid() {
            return Err(KinematicsError::InvalidObstacle { id });
        }
        self.objects.push(CollisionObject { id, obb });
        Ok(())
    }
}

/// Number of leading capsules that stand on the table and are exempt from
/// the table test.
pub const TABLE_EXEMPT_CAPSULES: usize = 1;

/// Link capsules at `q`: two per DH row (along `d·z`, then along `a·x`),
/// then the gripper body.
pub fn arm_capsules(arm: &ArmModel, q: &JointConfig) -> [Capsule; 13] {
    let frames = arm.joint_frames(q);
    let mut out = [Capsule::new(Vec3::ZERO, Vec3::ZERO, 0.0); 13];
    for i in 0..6 {
        let o = frames[i].origin;
        let mid = o + frames[i].axis(2) * arm.dh[i].d;
        let r = arm.link_radii[i];
        out[2 * i] = Capsule::new(o, mid, r);
        out[2 * i + 1] = Capsule::new(mid, frames[i + 1].origin, r);
    }
    let flange = frames[6];
    out[12] = Capsule::new(flange.origin, flange.origin + flange.axis(2) * arm.gripper_length, arm.gripper_radius);
    out
}

fn capsules_in_collision(capsules: &[Capsule], scene: &CollisionScene, ignore: &[&str]) -> bool {
    for (k, c) in capsules.iter().enumerate() {
        if k >= TABLE_EXEMPT_CAPSULES && capsule_hits_table(c, scene.table_z) {
            return true;
        }
        for o in &scene.objects {
            if !ignore.contains(&o.id.as_str()) && capsule_hits_obb(c, &o.obb) {
                return true;
            }
        }
        if scene.capsules.iter().any(|d| capsule_hits_capsule(c, d)) {
            return true;
        }
    }
    false
}

/// True when any link capsule at `q` touches the table, a non-ignored object
/// or one of the scene's stored capsules.
pub fn config_in_collision(arm: &ArmModel, q: &JointConfig, scene: &CollisionScene, ignore: &[&str]) -> bool {
    capsules_in_collision(&arm_capsules(arm, q), scene, ignore)
}

/// True when an object box held by the tool collides with a non-ignored
/// scene object or a stored capsule. The table is not checked: held objects
/// start and end their carry resting on it.
pub fn held_object_in_collision(obb: &Obb, scene: &CollisionScene, ignore: &[&str]) -> bool {
    scene.objects.iter().any(|o| !ignore.contains(&o.id.as_str()) && obb_overlap(obb, &o.obb))
        || scene.capsules.iter().any(|c| capsule_hits_obb(c, obb))
}

/// Object rigidly attached to the tool: its box relative to the tool frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeldObject<'a> {
    pub id: &'a str,
    pub in_tool: Obb,
}

/// Interpolation steps needed so no joint moves more than `resolution`.
pub fn path_steps(q0: &JointConfig, q1: &JointConfig, resolution: f64) -> usize {
    let span = q0.max_abs_diff(q1);
    ((span / resolution).ceil() as usize).max(1)
}

/// Default joint-space interpolation step, radians.
pub const DEFAULT_PATH_RESOLUTION: f64 = 0.017;

/// Checks the straight joint-space path from `q0` to `q1`, both endpoints
/// included, at steps no larger than `resolution`.
pub fn path_collision_free(
    arm: &ArmModel,
    q0: &JointConfig,
    q1: &JointConfig,
    scene: &CollisionScene,
    ignore: &[&str],
    resolution: f64,
) -> Result<bool, KinematicsError> {
    path_collision_free_holding(arm, q0, q1, scene, ignore, None, resolution)
}

/// [`path_collision_free`] with an optional held object carried by the tool.
pub fn path_collision_free_holding(
    arm: &ArmModel,
    q0: &JointConfig,
    q1: &JointConfig,
    scene: &CollisionScene,
    ignore: &[&str],
    held: Option<&HeldObject<'_>>,
    resolution: f64,
) -> Result<bool, KinematicsError> {
    for (which, q) in [q0, q1].into_iter().enumerate() {
        if !arm.within_limits(q) {
            return Err(KinematicsError::LimitsViolated { endpoint: which });
        }
    }
    if !(resolution > 0.0) {
        return Err(KinematicsError::InvalidModel { reason: "path resolution must be positive", joint: None });
    }
    let n = path_steps(q0, q1, resolution);
    for i in 0..=n {
        let q = q0.lerp(q1, i as f64 / n as f64);
        if config_in_collision(arm, &q, scene, ignore) {
            return Ok(false);
        }
        if let Some(h) = held {
            let tool = arm.forward_kinematics(&q);
            let world = Obb::new(tool.compose(&h.in_tool.pose), h.in_tool.half);
            if held_object_in_collision(&world, scene, ignore) {
                return Ok(false);
            }
        }
        if q0 == q1 {
            break;
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_distances() {
        let d = segment_segment_distance(Vec3::ZERO, Vec3::X, Vec3::new(0.5, 1.0, -1.0), Vec3::new(0.5, 1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-15);
        let p = segment_segment_distance(Vec3::ZERO, Vec3::X, Vec3::new(2.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0));
        assert!((p - 1.0).abs() < 1e-15);
        let deg = segment_segment_distance(Vec3::ZERO, Vec3::ZERO, Vec3::Y, Vec3::Y);
        assert_eq!(deg, 1.0);
    }

    #[test]
    fn segment_box() {
        let b = Obb::new(RigidPose::IDENTITY, Vec3::new(1.0, 1.0, 1.0));
        assert_eq!(segment_obb_distance(Vec3::new(-3.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0), &b), 0.0);
        let d = segment_obb_distance(Vec3::new(-3.0, 2.0, 0.0), Vec3::new(3.0, 2.0, 0.0), &b);
        assert!((d - 1.0).abs() < 1e-15);
        // Skew segment passing near an edge.
        let e = segment_obb_distance(Vec3::new(2.0, 0.0, 3.0), Vec3::new(2.0, 0.0, -3.0), &b);
        assert!((e - 1.0).abs() < 1e-15);
        let corner = segment_obb_distance(Vec3::new(2.0, 2.0, 2.0), Vec3::new(3.0, 3.0, 3.0), &b);
        assert!((corner - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn obb_sat() {
        let a = Obb::new(RigidPose::IDENTITY, Vec3::new(1.0, 1.0, 1.0));
        let b = Obb::new(RigidPose::from_translation(Vec3::new(1.9, 0.0, 0.0)), Vec3::new(1.0, 1.0, 1.0));
        assert!(obb_overlap(&a, &b));
        let c = Obb::new(
            RigidPose::new(crate::geometry::Rotation::from_yaw(core::f64::consts::FRAC_PI_4), Vec3::new(2.5, 0.0, 0.0)),
            Vec3::new(1.0, 1.0, 1.0),
        );
        // Rotated box reaches 2.5 - sqrt(2) = 1.086 > 1.
        assert!(!obb_overlap(&a, &c));
    }
}
