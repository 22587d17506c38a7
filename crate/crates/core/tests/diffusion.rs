use demosyn_core::diffusion::{
    build_covariance, cosine_alpha_bar, cosine_schedule, default_covariance, forward_noise, forward_noise_with, mahalanobis_loss,
    squared_exponential, ActionSequence, DiffusionError, ALPHA_BAR_FLOOR, DEFAULT_COSINE_OFFSET,
};
use demosyn_core::linalg::{solve_lower, symmetric_eigen, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `ᾱ(50)` for `K = 100`, `s = 0.008`, evaluated in 40-digit arithmetic.
const ALPHA_BAR_50_OF_100: f64 = 0.493_843_590_440_637_7;
const ALPHA_BAR_1_OF_100: f64 = 0.999_368_718_401_658_5;
const ALPHA_BAR_99_OF_100: f64 = 2.428_572_279_350_056_3e-4;

fn random_spd<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let b = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let bbt = b.matmul(&b.transpose()).unwrap();
    Matrix::from_fn(n, n, |i, j| bbt[(i, j)] / n as f64 + if i == j { 0.5 } else { 0.0 })
}

fn random_cov<R: Rng>(h: usize, rho: f64, rng: &mut R) -> demosyn_core::diffusion::CoordinationCovariance {
    let sl = random_spd(h, rng);
    let sr = random_spd(h, rng);
    let slr = Matrix::from_fn(h, h, |_, _| rng.random_range(-0.1..0.1));
    build_covariance(&sl, &sr, &slr, rho).unwrap()
}

#[test]
fn schedule_fixture_values() {
    let s = cosine_schedule(100, DEFAULT_COSINE_OFFSET).unwrap();
    assert_eq!(s.steps(), 100);
    assert_eq!(s.alpha_bar(0), Some(1.0));
    for (k, want) in [(1, ALPHA_BAR_1_OF_100), (50, ALPHA_BAR_50_OF_100), (99, ALPHA_BAR_99_OF_100)] {
        let got = s.alpha_bar(k).unwrap();
        assert!((got - want).abs() <= 1e-14 * want.max(1e-3), "k={k}: {got} vs {want}");
    }
    assert_eq!(s.alpha_bar(100), Some(ALPHA_BAR_FLOOR));
    assert_eq!(s.alpha_bar(101), None);
}

#[test]
fn single_step_schedule_hits_the_floor() {
    assert_eq!(cosine_schedule(1, DEFAULT_COSINE_OFFSET).unwrap().values(), &[1.0, ALPHA_BAR_FLOOR]);
}

#[test]
fn schedule_rejects_bad_arguments() {
    assert_eq!(cosine_schedule(0, 0.008), Err(DiffusionError::NoSteps));
    assert!(matches!(cosine_schedule(10, 0.0), Err(DiffusionError::InvalidOffset(_))));
    // Enough steps that the tail clips onto the floor twice in a row.
    assert!(matches!(
        cosine_schedule(100_000, 0.008),
        Err(DiffusionError::ScheduleSaturated { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Valid exactly when the second-to-last step stays above the floor;
    /// longer schedules would repeat the floor value.
    #[test]
    fn schedules_strictly_decrease(k in 1usize..2000, s in 0.001f64..0.1) {
        let fits = k == 1 || cosine_alpha_bar(k - 1, k, s) > ALPHA_BAR_FLOOR;
        let sched = match cosine_schedule(k, s) {
            Ok(sched) => sched,
            Err(DiffusionError::ScheduleSaturated { .. }) if !fits => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        prop_assert!(fits);
        let v = sched.values();
        prop_assert_eq!(v[0], 1.0);
        prop_assert!(v.windows(2).all(|w| w[1] < w[0]));
        prop_assert!(v.iter().all(|&a| (ALPHA_BAR_FLOOR..=1.0).contains(&a)));
    }

    #[test]
    fn factor_reconstructs_sigma(seed in any::<u64>(), h in 1usize..12, rho in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cov(h, rho, &mut rng);
        prop_assert!(c.reconstruction_error() <= 1e-10);
        let l = c.factor();
        for i in 0..2 * h {
            for j in i + 1..2 * h {
                prop_assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>(), h in 1usize..6, d in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cov(h, rng.random_range(0.0..=1.0), &mut rng);
        let target = ActionSequence::new(h, Matrix::from_fn(2 * h, d, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let pm = Matrix::from_fn(2 * h, d, |_, _| rng.random_range(-1.0..1.0));
        let (_, grad) = mahalanobis_loss(&ActionSequence::new(h, pm.clone()).unwrap(), &target, &c).unwrap();
        let eps = 1e-5;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..2 * h {
            for j in 0..d {
                let at = |delta: f64| {
                    let m = Matrix::from_fn(2 * h, d, |a, b| pm[(a, b)] + if (a, b) == (i, j) { delta } else { 0.0 });
                    mahalanobis_loss(&ActionSequence::new(h, m).unwrap(), &target, &c).unwrap().0
                };
                let fd = (at(eps) - at(-eps)) / (2.0 * eps);
                num += (fd - grad[(i, j)]).powi(2);
                den += grad[(i, j)].powi(2);
            }
        }
        prop_assert!((num / den).sqrt() <= 1e-6, "relative error {}", (num / den).sqrt());
    }

    #[test]
    fn loss_is_nonnegative_and_zero_only_at_target(seed in any::<u64>(), h in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = random_cov(h, 0.5, &mut rng);
        let t = ActionSequence::new(h, Matrix::from_fn(2 * h, 2, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let (l0, g0) = mahalanobis_loss(&t, &t, &c).unwrap();
        prop_assert_eq!(l0, 0.0);
        prop_assert!(g0.as_slice().iter().all(|&g| g == 0.0));
        let p = ActionSequence::new(h, Matrix::from_fn(2 * h, 2, |i, j| t.matrix()[(i, j)] + rng.random_range(-1.0..1.0))).unwrap();
        prop_assert!(mahalanobis_loss(&p, &t, &c).unwrap().0 > 0.0);
    }

    #[test]
    fn forward_noise_is_deterministic_per_seed(seed in any::<u64>(), k in 1usize..=100) {
        let sched = cosine_schedule(100, DEFAULT_COSINE_OFFSET).unwrap();
        let c = default_covariance(4, 0.3).unwrap();
        let a0 = ActionSequence::new(4, Matrix::from_fn(8, 3, |i, j| (i * 3 + j) as f64 * 0.1)).unwrap();
        let x = forward_noise(&a0, k, &sched, &c, seed).unwrap();
        let y = forward_noise(&a0, k, &sched, &c, seed).unwrap();
        prop_assert_eq!(x, y);
    }
}

#[test]
fn two_block_eigenstructure() {
    let i = Matrix::identity(2);
    let c = build_covariance(&i, &i, &i, 0.5).unwrap();
    let e = symmetric_eigen(c.sigma());
    for (got, want) in e.values.iter().zip([1.5, 1.5, 0.5, 0.5]) {
        assert!((got - want).abs() < 1e-12, "{:?}", e.values);
    }
}

#[test]
fn non_psd_coupling_is_rejected() {
    let i = Matrix::identity(2);
    let r = build_covariance(&i, &i, &i.scale(2.0), 1.0);
    assert!(matches!(r, Err(DiffusionError::NotPositiveSemiDefinite { .. })), "{r:?}");
    assert!(matches!(build_covariance(&i, &i, &i, 1.5), Err(DiffusionError::InvalidRho(_))));
    let asym = Matrix::from_row_major(2, 2, vec![1.0, 0.5, 0.0, 1.0]);
    assert!(matches!(build_covariance(&asym, &i, &i, 0.0), Err(DiffusionError::KernelNotSymmetric { .. })));
}

#[test]
fn euclidean_reduction() {
    let i = Matrix::identity(1);
    let c = build_covariance(&i, &i, &i, 0.0).unwrap();
    let zero = ActionSequence::zeros(1, 1);
    let e1 = ActionSequence::new(1, Matrix::from_row_major(2, 1, vec![1.0, 0.0])).unwrap();
    let (loss, grad) = mahalanobis_loss(&e1, &zero, &c).unwrap();
    assert_eq!(loss, 1.0);
    assert_eq!(grad.as_slice(), &[2.0, 0.0]);
}

#[test]
fn shape_mismatches_are_errors() {
    let sched = cosine_schedule(10, DEFAULT_COSINE_OFFSET).unwrap();
    let c = default_covariance(3, 0.0).unwrap();
    let a0 = ActionSequence::zeros(2, 1);
    assert!(matches!(forward_noise(&a0, 1, &sched, &c, 0), Err(DiffusionError::ShapeMismatch { .. })));
    let ok = ActionSequence::zeros(3, 1);
    assert!(matches!(forward_noise(&ok, 11, &sched, &c, 0), Err(DiffusionError::StepOutOfRange { .. })));
}

#[test]
fn step_zero_returns_the_clean_actions() {
    let sched = cosine_schedule(10, DEFAULT_COSINE_OFFSET).unwrap();
    let c = default_covariance(3, 0.7).unwrap();
    let a0 = ActionSequence::new(3, Matrix::from_fn(6, 2, |i, j| i as f64 - j as f64)).unwrap();
    assert_eq!(forward_noise(&a0, 0, &sched, &c, 42).unwrap(), a0);
}

/// Smallest eigenvalue of Σ does not grow as coupling strengthens.
#[test]
fn coupling_is_monotone() {
    let k = squared_exponential(6, 2.0);
    let mut prev = f64::INFINITY;
    for step in 0..=20 {
        let rho = step as f64 / 20.0;
        let c = build_covariance(&k, &k, &k, rho);
        let Ok(c) = c else { break };
        let min = *symmetric_eigen(c.sigma()).values.last().unwrap();
        assert!(min <= prev + 1e-12, "rho {rho}: {min} > {prev}");
        prev = min;
    }
}

/// Empirical covariance of the scaled noise at the clip floor over 10⁵ draws.
/// With ρ = 0 the left-right block is tested as a whole: the sum of squared
/// standardized entries is χ² with H² degrees of freedom.
#[test]
fn monte_carlo_noise_covariance() {
    let (h, draws) = (4usize, 100_000usize);
    let n = 2 * h;
    let sched = cosine_schedule(100, DEFAULT_COSINE_OFFSET).unwrap();
    let scale = 1.0 / (1.0 - sched.alpha_bar(100).unwrap()).sqrt();
    for rho in [0.0, 0.6] {
        let c = default_covariance(h, rho).unwrap();
        let a0 = ActionSequence::zeros(h, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut acc = vec![0.0; n * n];
        let mut cross = vec![0.0; h * h];
        for _ in 0..draws {
            let x = forward_noise_with(&a0, 100, &sched, &c, &mut rng).unwrap();
            let v: Vec<f64> = x.matrix().column(0).iter().map(|a| a * scale).collect();
            for i in 0..n {
                for j in 0..n {
                    acc[i * n + j] += v[i] * v[j];
                }
            }
            // Whitened per arm; the factor is block diagonal at ρ = 0.
            let w = solve_lower(c.factor(), &v).unwrap();
            for i in 0..h {
                for j in 0..h {
                    cross[i * h + j] += w[i] * w[h + j];
                }
            }
        }
        let emp = Matrix::from_fn(n, n, |i, j| acc[i * n + j] / draws as f64);
        let sigma = c.sigma();
        let rel = emp.sub(sigma).frobenius_norm() / sigma.frobenius_norm();
        assert!(rel <= 0.03, "rho {rho}: covariance error {rel}");
        if rho == 0.0 {
            let chi2: f64 = cross.iter().map(|s| s * s / draws as f64).sum();
            let dof = (h * h) as f64;
            assert!(chi2 <= dof + 3.0 * (2.0 * dof).sqrt(), "chi2 {chi2}");
        }
    }
}

/// The sample mean converges to `√ᾱ·A₀` inside the 3σ CLT band.
#[test]
fn noise_mean_converges() {
    let (h, draws, k) = (3usize, 20_000usize, 40usize);
    let sched = cosine_schedule(100, DEFAULT_COSINE_OFFSET).unwrap();
    let ab = sched.alpha_bar(k).unwrap();
    let c = default_covariance(h, 0.4).unwrap();
    let a0 = ActionSequence::new(h, Matrix::from_fn(2 * h, 2, |i, j| 0.3 * i as f64 - 0.5 * j as f64)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sum = Matrix::zeros(2 * h, 2);
    for _ in 0..draws {
        let x = forward_noise_with(&a0, k, &sched, &c, &mut rng).unwrap();
        sum = Matrix::from_fn(2 * h, 2, |i, j| sum[(i, j)] + x.matrix()[(i, j)]);
    }
    for i in 0..2 * h {
        for j in 0..2 {
            let mean = sum[(i, j)] / draws as f64;
            let sd = ((1.0 - ab) * c.sigma()[(i, i)] / draws as f64).sqrt();
            let z = (mean - ab.sqrt() * a0.matrix()[(i, j)]) / sd;
            assert!(z.abs() <= 3.0, "entry ({i},{j}): z = {z}");
        }
    }
}
