//! Coordination-aware diffusion numerics: cosine noise schedule, the
//! two-arm temporal covariance, correlated forward noising and the
//! Mahalanobis training loss.
//!
//! The schedule value `ᾱ(k)` is the cumulative signal fraction of the
//! standard closed-form forward process `A_k = √ᾱ(k)·A_0 + √(1−ᾱ(k))·ε`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{cholesky, solve_lower, solve_lower_transpose, LinalgError, Matrix};

/// Lower clip of `ᾱ`.
pub const ALPHA_BAR_FLOOR: f64 = 1e-5;
/// Default cosine offset `s`.
pub const DEFAULT_COSINE_OFFSET: f64 = 0.008;
/// Default squared-exponential length scale, in steps.
pub const DEFAULT_LENGTH_SCALE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DiffusionError {
    #[error("schedule needs at least one step")]
    NoSteps,
    #[error("cosine offset must be positive and finite, got {0}")]
    InvalidOffset(f64),
    /// The clipped schedule is no longer strictly decreasing at `step`; the
    /// step count is too large for the floor.
    #[error("schedule saturates at the clip floor at step {step}")]
    ScheduleSaturated { step: usize },
    #[error("coupling strength must lie in [0, 1], got {0}")]
    InvalidRho(f64),
    #[error("kernel {which} is not a {expected}x{expected} matrix")]
    KernelShape { which: &'static str, expected: usize },
    #[error("kernel {which} is not symmetric")]
    KernelNotSymmetric { which: &'static str },
    #[error("assembled covariance is not positive semi-definite (pivot {pivot:e} at row {row})")]
    NotPositiveSemiDefinite { row: usize, pivot: f64 },
    #[error("covariance is singular; the Mahalanobis weight is undefined")]
    SingularCovariance,
    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("step {k} outside 0..={steps}")]
    StepOutOfRange { k: usize, steps: usize },
    #[error("action sequence must be finite with horizon ≥ 1")]
    InvalidActions,
}

/// `ᾱ(0..=K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    alpha_bar: Vec<f64>,
}

impl NoiseSchedule {
    pub fn steps(&self) -> usize {
        self.alpha_bar.len() - 1
    }

    pub fn alpha_bar(&self, k: usize) -> Option<f64> {
        self.alpha_bar.get(k).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha_bar
    }
}

/// Unclipped `ᾱ(k) = f(k)/f(0)` with `f(k) = cos²(((k/K + s)/(1 + s))·π/2)`.
pub fn cosine_alpha_bar(k: usize, steps: usize, s: f64) -> f64 {
    let f = |k: usize| {
        let x = ((k as f64 / steps as f64 + s) / (1.0 + s)) * core::f64::consts::FRAC_PI_2;
        let c = x.cos();
        c * c
    };
    f(k) / f(0)
}

/// Cosine schedule clipped below at [`ALPHA_BAR_FLOOR`]. Fails when clipping
/// would make two consecutive values equal.
pub fn cosine_schedule(steps: usize, s: f64) -> Result<NoiseSchedule, DiffusionError> {
    if steps == 0 {
        return Err(DiffusionError::NoSteps);
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(DiffusionError::InvalidOffset(s));
    }
    let mut alpha_bar = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let a = if k == 0 { 1.0 } else { cosine_alpha_bar(k, steps, s).max(ALPHA_BAR_FLOOR) };
        if k > 0 && a >= alpha_bar[k - 1] {
            return Err(DiffusionError::ScheduleSaturated { step: k });
        }
        alpha_bar.push(a);
    }
    Ok(NoiseSchedule { alpha_bar })
}

/// `exp(−(i−j)²/(2ℓ²))` on an `h × h` grid.
pub fn squared_exponential(h: usize, length_scale: f64) -> Matrix {
    Matrix::from_fn(h, h, |i, j| {
        let d = i as f64 - j as f64;
        (-(d * d) / (2.0 * length_scale * length_scale)).exp()
    })
}

/// `[[Σ_L, ρΣ_LR], [ρΣ_LRᵀ, Σ_R]]` and its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinationCovariance {
    horizon: usize,
    rho: f64,
    sigma: Matrix,
    factor: Matrix,
}

impl CoordinationCovariance {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    /// `L` with `L Lᵀ = Σ`.
    pub fn factor(&self) -> &Matrix {
        &self.factor
    }

    /// `‖L Lᵀ − Σ‖_F / ‖Σ‖_F`.
    pub fn reconstruction_error(&self) -> f64 {
        let llt = self.factor.matmul(&self.factor.transpose()).expect("square factor");
        llt.sub(&self.sigma).frobenius_norm() / self.sigma.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    /// Applies `W = Σ⁻¹` to `r` through two triangular solves.
    pub fn apply_weight(&self, r: &[f64]) -> Result<Vec<f64>, DiffusionError> {
        let y = solve_lower(&self.factor, r).map_err(weight_error)?;
        solve_lower_transpose(&self.factor, &y).map_err(weight_error)
    }
}

fn weight_error(e: LinalgError) -> DiffusionError {
    match e {
        LinalgError::DimensionMismatch { expected, got } => DiffusionError::ShapeMismatch {
            expected_rows: expected,
            expected_cols: 1,
            rows: got,
            cols: 1,
        },
        _ => DiffusionError::SingularCovariance,
    }
}

/// Assembles and factorizes the coordination covariance. Non-PSD
/// assemblies are reported, never repaired.
pub fn build_covariance(
    sigma_l: &Matrix,
    sigma_r: &Matrix,
    sigma_lr: &Matrix,
    rho: f64,
) -> Result<CoordinationCovariance, DiffusionError> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(DiffusionError::InvalidRho(rho));
    }
    let h = sigma_l.rows();
    for (which, k) in [("left", sigma_l), ("right", sigma_r), ("cross", sigma_lr)] {
        if h == 0 || k.rows() != h || k.cols() != h || !k.is_finite() {
            return Err(DiffusionError::KernelShape { which, expected: h });
        }
    }
    for (which, k) in [("left", sigma_l), ("right", sigma_r)] {
        if !k.is_symmetric(1e-12) {
            return Err(DiffusionError::KernelNotSymmetric { which });
        }
    }
    let sigma = Matrix::from_fn(2 * h, 2 * h, |i, j| match (i < h, j < h) {
        (true, true) => sigma_l[(i, j)],
        (false, false) => sigma_r[(i - h, j - h)],
        (true, false) => rho * sigma_lr[(i, j - h)],
        (false, true) => rho * sigma_lr[(j, i - h)],
    });
    let factor = cholesky(&sigma).map_err(|e| match e {
        LinalgError::NotPositiveSemiDefinite { row, pivot } => DiffusionError::NotPositiveSemiDefinite { row, pivot },
        _ => DiffusionError::NotPositiveSemiDefinite { row: 0, pivot: f64::NAN },
    })?;
    Ok(CoordinationCovariance {
        horizon: h,
        rho,
        sigma,
        factor,
    })
}

/// Covariance with squared-exponential kernels of length scale ℓ for both
/// arms and the cross term.
pub fn default_covariance(horizon: usize, rho: f64) -> Result<CoordinationCovariance, DiffusionError> {
    let k = squared_exponential(horizon, DEFAULT_LENGTH_SCALE);
    build_covariance(&k, &k, &k, rho)
}

/// `2H × d` actions: rows `0..H` left arm, `H..2H` right arm.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSequence {
    horizon: usize,
    data: Matrix,
}

impl ActionSequence {
    pub fn new(horizon: usize, data: Matrix) -> Result<Self, DiffusionError> {
        if horizon == 0 || data.rows() != 2 * horizon || data.cols() == 0 || !data.is_finite() {
            return Err(DiffusionError::InvalidActions);
        }
        Ok(Self { horizon, data })
    }

    pub fn zeros(horizon: usize, dim: usize) -> Self {
        Self {
            horizon,
            data: Matrix::zeros(2 * horizon, dim),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.data.cols()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.data
    }
}

fn check_shape(a: &ActionSequence, rows: usize, cols: usize) -> Result<(), DiffusionError> {
    if a.data.rows() != rows || a.data.cols() != cols {
        return Err(DiffusionError::ShapeMismatch {
            expected_rows: rows,
            expected_cols: cols,
            rows: a.data.rows(),
            cols: a.data.cols(),
        });
    }
    Ok(())
}

/// `√ᾱ(k)·A₀ + √(1−ᾱ(k))·L·Z` with `Z` a standard-normal `2H × d` draw from
/// ChaCha8 seeded with `seed`, filled row-major.
pub fn forward_noise(
    a0: &ActionSequence,
    k: usize,
    schedule: &NoiseSchedule,
    cov: &CoordinationCovariance,
    seed: u64,
) -> Result<ActionSequence, DiffusionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    forward_noise_with(a0, k, schedule, cov, &mut rng)
}

/// [`forward_noise`] drawing from a caller-owned generator.
pub fn forward_noise_with<R: rand::Rng>(
    a0: &ActionSequence,
    k: usize,
    schedule: &NoiseSchedule,
    cov: &CoordinationCovariance,
    rng: &mut R,
) -> Result<ActionSequence, DiffusionError> {
    let n = 2 * cov.horizon;
    check_shape(a0, n, a0.dim())?;
    let ab = schedule.alpha_bar(k).ok_or(DiffusionError::StepOutOfRange {
        k,
        steps: schedule.steps(),
    })?;
    let d = a0.dim();
    let z = Matrix::from_fn(n, d, |_, _| StandardNormal.sample(rng));
    let noise = cov.factor.matmul(&z).expect("shapes checked");
    let (sa, sn) = (ab.sqrt(), (1.0 - ab).sqrt());
    let data = Matrix::from_fn(n, d, |i, j| sa * a0.data[(i, j)] + sn * noise[(i, j)]);
    Ok(ActionSequence {
        horizon: a0.horizon,
        data,
    })
}

/// Loss `Σ_columns rᵀ W r` with `r = pred − target` and `W = Σ⁻¹`, and its
/// gradient `2 W r` with respect to `pred`.
pub fn mahalanobis_loss(
    pred: &ActionSequence,
    target: &ActionSequence,
    cov: &CoordinationCovariance,
) -> Result<(f64, Matrix), DiffusionError> {
    let n = 2 * cov.horizon;
    check_shape(pred, n, pred.dim())?;
    check_shape(target, n, pred.dim())?;
    let d = pred.dim();
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(n, d);
    for j in 0..d {
        let r: Vec<f64> = (0..n).map(|i| pred.data[(i, j)] - target.data[(i, j)]).collect();
        let wr = cov.apply_weight(&r)?;
        loss += r.iter().zip(&wr).map(|(a, b)| a * b).sum::<f64>();
        let g: Vec<f64> = wr.iter().map(|v| 2.0 * v).collect();
        grad.set_column(j, &g);
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_step_schedule() {
        let s = cosine_schedule(1, DEFAULT_COSINE_OFFSET).unwrap();
        assert_eq!(s.values(), &[1.0, ALPHA_BAR_FLOOR]);
    }

    #[test]
    fn uncoupled_identity() {
        let i = Matrix::identity(3);
        let c = build_covariance(&i, &i, &i, 0.0).unwrap();
        assert_eq!(c.sigma(), &Matrix::identity(6));
    }

    #[test]
    fn overcoupled_rejected() {
        let i = Matrix::identity(2);
        let two = i.scale(2.0);
        assert!(matches!(
            build_covariance(&i, &i, &two, 1.0),
            Err(DiffusionError::NotPositiveSemiDefinite { .. })
        ));
    }

    #[test]
    fn euclidean_loss() {
        let c = build_covariance(&Matrix::identity(1), &Matrix::identity(1), &Matrix::identity(1), 0.0).unwrap();
        let mut p = Matrix::zeros(2, 1);
        p[(0, 0)] = 1.0;
        let pred = ActionSequence::new(1, p).unwrap();
        let (l, g) = mahalanobis_loss(&pred, &ActionSequence::zeros(1, 1), &c).unwrap();
        assert_eq!(l, 1.0);
        assert_eq!(g.column(0), [2.0, 0.0]);
    }
}
