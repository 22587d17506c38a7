//! Rigid-body geometry: vectors, unit quaternions, SE(3) poses, principal
//! axis fitting and the pinhole camera.

use core::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

#[allow(unused_imports)]
use num_traits::Float;
use thiserror::Error;

use crate::linalg::{symmetric_eigen, Matrix};

/// Eigenvalue ratio (largest / second largest) below which a point cloud is
/// considered too isotropic to carry an orientation.
pub const DEGENERACY_RATIO: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum GeometryError {
    #[error("point cloud is near-isotropic (eigenvalue ratio {ratio:.4} < {DEGENERACY_RATIO})")]
    DegenerateCloud { ratio: f64 },
    #[error("need at least {needed} points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("invalid depth {depth}")]
    InvalidDepth { depth: f64 },
    #[error("pixel ({u}, {v}) lies outside the image")]
    PixelOutOfBounds { u: f64, v: f64 },
    #[error("point is behind the camera (depth {depth})")]
    BehindCamera { depth: f64 },
    #[error("invalid camera model: {0}")]
    InvalidCamera(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Returns `None` for (near) zero vectors.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 1e-300 && n.is_finite()).then(|| self / n)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, o: Vec3, t: f64) -> Vec3 {
        self + (o - self) * t
    }

    pub fn component_mul(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// 3x3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Mat3 {
        Mat3([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Max absolute entry of `MᵀM − I`.
    pub fn orthonormality_error(&self) -> f64 {
        let p = self.transpose().mul_mat(self);
        let mut e: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                e = e.max((p.0[i][j] - target).abs());
            }
        }
        e
    }
}

/// Unit quaternion `(w, x, y, z)`, canonicalized to `w >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    w: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl Default for Rotation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation {
        w: 1.0,
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    /// Normalizes and canonicalizes; `None` for a zero or non-finite input.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Option<Rotation> {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if !(n.is_finite() && n > 1e-300) {
            return None;
        }
        Some(Rotation { w: w / n, x: x / n, y: y / n, z: z / n }.canonical())
    }

    /// Like [`Rotation::from_quaternion`], but input that is already unit
    /// length to rounding is kept bit for bit, so serialized rotations
    /// round-trip exactly.
    pub fn from_stored_quaternion(w: f64, x: f64, y: f64, z: f64) -> Option<Rotation> {
        let n2 = w * w + x * x + y * y + z * z;
        if n2.is_finite() && (n2 - 1.0).abs() <= 1e-14 {
            return Some(Rotation { w, x, y, z }.canonical());
        }
        Self::from_quaternion(w, x, y, z)
    }

    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Rotation {
        let Some(a) = axis.normalized() else {
            return Rotation::IDENTITY;
        };
        let (s, c) = (angle * 0.5).sin_cos();
        Rotation {
            w: c,
            x: a.x * s,
            y: a.y * s,
            z: a.z * s,
        }
        .canonical()
    }

    pub fn from_yaw(yaw: f64) -> Rotation {
        Self::from_axis_angle(Vec3::Z, yaw)
    }

    /// Rotation from a proper orthonormal matrix (Shepperd's method).
    pub fn from_matrix(m: &Mat3) -> Rotation {
        let r = &m.0;
        let trace = r[0][0] + r[1][1] + r[2][2];
        let (w, x, y, z);
        if trace > r[0][0] && trace > r[1][1] && trace > r[2][2] {
            let s = (trace + 1.0).sqrt() * 2.0;
            w = 0.25 * s;
            x = (r[2][1] - r[1][2]) / s;
            y = (r[0][2] - r[2][0]) / s;
            z = (r[1][0] - r[0][1]) / s;
        } else if r[0][0] > r[1][1] && r[0][0] > r[2][2] {
            let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt() * 2.0;
            w = (r[2][1] - r[1][2]) / s;
            x = 0.25 * s;
            y = (r[0][1] + r[1][0]) / s;
            z = (r[0][2] + r[2][0]) / s;
        } else if r[1][1] > r[2][2] {
            let s = (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt() * 2.0;
            w = (r[0][2] - r[2][0]) / s;
            x = (r[0][1] + r[1][0]) / s;
            y = 0.25 * s;
            z = (r[1][2] + r[2][1]) / s;
        } else {
            let s = (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt() * 2.0;
            w = (r[1][0] - r[0][1]) / s;
            x = (r[0][2] + r[2][0]) / s;
            y = (r[1][2] + r[2][1]) / s;
            z = 0.25 * s;
        }
        Rotation::from_quaternion(w, x, y, z).unwrap_or(Rotation::IDENTITY)
    }

    /// Rotation vector (axis · angle) to quaternion.
    pub fn from_rotation_vector(v: Vec3) -> Rotation {
        let angle = v.norm();
        if angle < 1e-300 {
            return Rotation::IDENTITY;
        }
        Self::from_axis_angle(v / angle, angle)
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn xyz(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn to_wxyz(&self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    fn canonical(self) -> Rotation {
        let flip = self.w < 0.0
            || (self.w == 0.0
                && (self.x < 0.0 || (self.x == 0.0 && (self.y < 0.0 || (self.y == 0.0 && self.z < 0.0)))));
        if flip {
            Rotation {
                w: -self.w,
                x: -self.x,
                y: -self.y,
                z: -self.z,
            }
        } else {
            self
        }
    }

    /// Renormalizes only when rounding has drifted measurably, so exact
    /// inputs (identity products) stay bit-exact.
    fn renormalized(self) -> Rotation {
        let n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z;
        let q = if (n2 - 1.0).abs() > 4.0 * f64::EPSILON {
            let n = n2.sqrt();
            Rotation {
                w: self.w / n,
                x: self.x / n,
                y: self.y / n,
                z: self.z / n,
            }
        } else {
            self
        };
        q.canonical()
    }

    /// Hamilton product `self ⊗ other` (apply `other` first).
    pub fn compose(&self, o: &Rotation) -> Rotation {
        Rotation {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
        .renormalized()
    }

    pub fn inverse(&self) -> Rotation {
        Rotation {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
        .canonical()
    }

    pub fn rotate(&self, v: Vec3) -> Vec3 {
        let q = self.xyz();
        let t = q.cross(v) * 2.0;
        v + t * self.w + q.cross(t)
    }

    pub fn to_matrix(&self) -> Mat3 {
        Mat3::from_columns(self.rotate(Vec3::X), self.rotate(Vec3::Y), self.rotate(Vec3::Z))
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        2.0 * self.xyz().norm().atan2(self.w.abs())
    }

    /// Geodesic distance on SO(3), in radians.
    pub fn angle_to(&self, o: &Rotation) -> f64 {
        self.inverse().compose(o).angle()
    }

    /// Axis · angle with angle in `[0, π]`.
    pub fn to_rotation_vector(&self) -> Vec3 {
        let v = self.xyz();
        let s = v.norm();
        if s < 1e-300 {
            return Vec3::ZERO;
        }
        let angle = 2.0 * s.atan2(self.w);
        v * (angle / s)
    }

    /// Heading of the rotated x axis projected on the xy plane.
    pub fn yaw(&self) -> f64 {
        let x = self.rotate(Vec3::X);
        x.y.atan2(x.x)
    }

    pub fn slerp(&self, o: &Rotation, t: f64) -> Rotation {
        let mut dot = self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z;
        let mut b = *o;
        if dot < 0.0 {
            dot = -dot;
            b = Rotation {
                w: -b.w,
                x: -b.x,
                y: -b.y,
                z: -b.z,
            };
        }
        let (ka, kb) = if dot > 0.9995 {
            (1.0 - t, t)
        } else {
            let theta = dot.min(1.0).acos();
            let s = theta.sin();
            (((1.0 - t) * theta).sin() / s, (t * theta).sin() / s)
        };
        Rotation::from_quaternion(
            ka * self.w + kb * b.w,
            ka * self.x + kb * b.x,
            ka * self.y + kb * b.y,
            ka * self.z + kb * b.z,
        )
        .unwrap_or(*self)
    }
}

/// Element of SE(3): `p ↦ R p + t`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RigidPose {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl RigidPose {
    pub const IDENTITY: RigidPose = RigidPose {
        rotation: Rotation::IDENTITY,
        translation: Vec3::ZERO,
    };

    pub const fn new(rotation: Rotation, translation: Vec3) -> Self {
        Self { rotation, translation }
    }

    pub fn from_translation(t: Vec3) -> Self {
        Self::new(Rotation::IDENTITY, t)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidPose) -> RigidPose {
        RigidPose {
            rotation: self.rotation.compose(&other.rotation),
            translation: self.translation + self.rotation.rotate(other.translation),
        }
    }

    pub fn inverse(&self) -> RigidPose {
        let r = self.rotation.inverse();
        RigidPose {
            rotation: r,
            translation: -r.rotate(self.translation),
        }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.rotate(p) + self.translation
    }

    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation.rotate(v)
    }

    /// `(translation distance, rotation angle)` between two poses.
    pub fn error_to(&self, o: &RigidPose) -> (f64, f64) {
        (
            self.translation.distance(o.translation),
            self.rotation.angle_to(&o.rotation),
        )
    }

    pub fn approx_eq(&self, o: &RigidPose, tol: f64) -> bool {
        let (dt, da) = self.error_to(o);
        dt <= tol && da <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.translation.is_finite() && self.rotation.to_wxyz().iter().all(|v| v.is_finite())
    }
}

/// Eigen-analysis of a point cloud's covariance.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalAxes {
    pub rotation: Rotation,
    /// Covariance eigenvalues, descending.
    pub variances: [f64; 3],
}

fn mean(points: &[Vec3]) -> Vec3 {
    let mut c = Vec3::ZERO;
    for p in points {
        c += *p;
    }
    c / points.len() as f64
}

/// Principal axes of a 3D point cloud.
///
/// Columns of the returned rotation are the covariance eigenvectors sorted by
/// descending eigenvalue. The first axis is flipped so that it has a
/// non-negative dot product with `reference`; the second axis is signed so
/// that the third (their cross product) points into the upper half-space
/// (`+z`), which fixes the frame right-handed and deterministic.
pub fn principal_axes(points: &[Vec3], reference: Vec3) -> Result<Rotation, GeometryError> {
    principal_axes_full(points, reference).map(|a| a.rotation)
}

pub fn principal_axes_full(points: &[Vec3], reference: Vec3) -> Result<PrincipalAxes, GeometryError> {
    if points.len() < 2 {
        return Err(GeometryError::InsufficientPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let c = mean(points);
    let mut cov = Matrix::zeros(3, 3);
    for p in points {
        let d = *p - c;
        for i in 0..3 {
            for j in i..3 {
                cov[(i, j)] += d[i] * d[j];
            }
        }
    }
    let n = points.len() as f64;
    for i in 0..3 {
        for j in i..3 {
            cov[(i, j)] /= n;
            cov[(j, i)] = cov[(i, j)];
        }
    }
    let eig = symmetric_eigen(&cov);
    let (l1, l2) = (eig.values[0], eig.values[1].max(0.0));
    let ratio = if l2 > 0.0 { l1 / l2 } else if l1 > 0.0 { f64::INFINITY } else { 1.0 };
    if ratio < DEGENERACY_RATIO {
        return Err(GeometryError::DegenerateCloud { ratio });
    }
    let col = |k: usize| Vec3::new(eig.vectors[(0, k)], eig.vectors[(1, k)], eig.vectors[(2, k)]);
    let mut e1 = col(0).normalized().unwrap_or(Vec3::X);
    if e1.dot(reference) < 0.0 {
        e1 = -e1;
    }
    // Re-orthogonalize the second axis against the first.
    let mut e2 = col(1) - e1 * e1.dot(col(1));
    e2 = e2.normalized().unwrap_or_else(|| any_orthogonal(e1));
    let mut e3 = e1.cross(e2);
    let up = e3.z;
    if up < 0.0 || (up.abs() < 1e-12 && e2.z < 0.0) {
        e2 = -e2;
        e3 = -e3;
    }
    let rotation = Rotation::from_matrix(&Mat3::from_columns(e1, e2, e3));
    Ok(PrincipalAxes {
        rotation,
        variances: [eig.values[0], eig.values[1], eig.values[2]],
    })
}

fn any_orthogonal(v: Vec3) -> Vec3 {
    let helper = if v.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    v.cross(helper).normalized().unwrap_or(Vec3::Y)
}

/// Yaw of the dominant horizontal direction of a cloud projected onto the
/// xy plane, from the closed-form 2x2 covariance eigenvector. The heading is
/// chosen so that it has non-negative dot product with `reference` (xy part).
pub fn principal_yaw(points: &[Vec3], reference: Vec3) -> Result<f64, GeometryError> {
    if points.len() < 2 {
        return Err(GeometryError::InsufficientPoints {
            needed: 2,
            got: points.len(),
        });
    }
    let c = mean(points);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let dx = p.x - c.x;
        let dy = p.y - c.y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let n = points.len() as f64;
    let (sxx, syy, sxy) = (sxx / n, syy / n, sxy / n);
    let half_trace = 0.5 * (sxx + syy);
    let disc = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let (l1, l2) = (half_trace + disc, (half_trace - disc).max(0.0));
    let ratio = if l2 > 0.0 { l1 / l2 } else if l1 > 0.0 { f64::INFINITY } else { 1.0 };
    if ratio < DEGENERACY_RATIO {
        return Err(GeometryError::DegenerateCloud { ratio });
    }
    let mut yaw = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (s, co) = yaw.sin_cos();
    if co * reference.x + s * reference.y < 0.0 {
        yaw = wrap_angle(yaw + core::f64::consts::PI);
    }
    Ok(yaw)
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    use core::f64::consts::{PI, TAU};
    let mut r = a % TAU;
    if r <= -PI {
        r += TAU;
    } else if r > PI {
        r -= TAU;
    }
    r
}

/// Pinhole camera with a camera-to-world extrinsic. Camera frame: `+z` along
/// the optical axis, `+x` to the image right, `+y` to the image bottom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub extrinsic: RigidPose,
}

impl CameraModel {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: u32,
        height: u32,
        extrinsic: RigidPose,
    ) -> Result<Self, GeometryError> {
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return Err(GeometryError::InvalidCamera("focal lengths must be positive"));
        }
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return Err(GeometryError::InvalidCamera("principal point must lie inside the image"));
        }
        if !extrinsic.is_finite() {
            return Err(GeometryError::InvalidCamera("extrinsic must be finite"));
        }
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            extrinsic,
        })
    }

    pub fn contains_pixel(&self, u: f64, v: f64) -> bool {
        u >= -0.5 && v >= -0.5 && u < self.width as f64 - 0.5 && v < self.height as f64 - 0.5
    }

    /// Camera-frame ray direction (unnormalized, `z = 1`) through pixel `(u, v)`.
    pub fn ray_camera(&self, u: f64, v: f64) -> Vec3 {
        Vec3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    /// Lifts pixel `(u, v)` at depth `d` (meters along the optical axis) to
    /// the world frame.
    pub fn backproject(&self, u: f64, v: f64, d: f64) -> Result<Vec3, GeometryError> {
        if !(d.is_finite() && d > 0.0) {
            return Err(GeometryError::InvalidDepth { depth: d });
        }
        if !self.contains_pixel(u, v) {
            return Err(GeometryError::PixelOutOfBounds { u, v });
        }
        Ok(self.extrinsic.transform_point(self.ray_camera(u, v) * d))
    }

    /// World point to `(u, v, depth)`.
    pub fn project(&self, p: Vec3) -> Result<(f64, f64, f64), GeometryError> {
        let c = self.extrinsic.inverse().transform_point(p);
        if !(c.z > 0.0) {
            return Err(GeometryError::BehindCamera { depth: c.z });
        }
        Ok((self.fx * c.x / c.z + self.cx, self.fy * c.y / c.z + self.cy, c.z))
    }
}

/// Free-function form of [`CameraModel::backproject`].
pub fn backproject(u: f64, v: f64, d: f64, cam: &CameraModel) -> Result<Vec3, GeometryError> {
    cam.backproject(u, v, d)
}
