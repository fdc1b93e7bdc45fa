mod common;

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use common::{abs_sup_images, density, kolmogorov_deep, kolmogorov_theta, marsaglia_phi, simpson};
use donsker::oracles::{
    bm_abs_sup_cdf, bm_covariance, bm_sup_cdf, bridge_covariance, kiefer_muller_covariance,
    kolmogorov_cdf, kolmogorov_quantile, normal_cdf, LimitLaw,
};
use donsker::processes::TestFunction;
use donsker::sampling::{DistributionKind, DistributionSpec};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn probes() -> Vec<f64> {
    (0..100).map(|i| -8.0 + 16.0 * i as f64 / 99.0).collect()
}

#[test]
fn normal_cdf_matches_series() {
    let worst = probes().into_iter().map(|x| (normal_cdf(x) - marsaglia_phi(x)).abs()).fold(0.0, f64::max);
    println!("max |Phi - series| over 100 probes: {worst:e}");
    assert!(worst <= 1e-6);
}

#[test]
fn normal_cdf_reference_points() {
    assert_abs_diff_eq!(normal_cdf(0.0), 0.5, epsilon = 1e-16);
    assert_abs_diff_eq!(normal_cdf(1.959_963_984_540_054), 0.975, epsilon = 1e-11);
    assert_abs_diff_eq!(normal_cdf(-3.0), 0.001_349_898_031_630_094_6, epsilon = 1e-11);
}

#[test]
fn kolmogorov_matches_both_series() {
    let mut prev = 0.0;
    for i in 0..=275 {
        let x = 0.25 + i as f64 * 0.01;
        let k = kolmogorov_cdf(x);
        assert_abs_diff_eq!(k, kolmogorov_theta(x), epsilon = 1e-10);
        if x >= 0.4 {
            assert_abs_diff_eq!(k, kolmogorov_deep(x), epsilon = 1e-10);
        }
        assert!(k >= prev, "not monotone at {x}");
        prev = k;
    }
    assert_abs_diff_eq!(kolmogorov_cdf(1.36), kolmogorov_deep(1.36), epsilon = 5e-4);
    assert_abs_diff_eq!(kolmogorov_cdf(1.36), 0.9505, epsilon = 5e-4);
}

#[test]
fn kolmogorov_small_argument_branch_is_continuous() {
    // The theta form below 0.2, the alternating series (with cancellation
    // around 1e-14) above.
    for x in [0.05, 0.1, 0.15, 0.19, 0.199_999] {
        assert_abs_diff_eq!(kolmogorov_cdf(x), kolmogorov_theta(x), epsilon = 1e-15);
    }
    for x in [0.2, 0.21, 0.25] {
        assert_abs_diff_eq!(kolmogorov_cdf(x), kolmogorov_theta(x), epsilon = 1e-13);
    }
    assert_eq!(kolmogorov_cdf(0.0), 0.0);
    assert!((kolmogorov_quantile(0.99) - 1.6276).abs() < 1e-3);
    assert_abs_diff_eq!(kolmogorov_cdf(kolmogorov_quantile(0.95)), 0.95, epsilon = 1e-12);
}

#[test]
fn sup_laws_agree_with_reflection_and_images() {
    for i in 1..=60 {
        let x = i as f64 * 0.05;
        assert_abs_diff_eq!(bm_sup_cdf(x), 2.0 * marsaglia_phi(x) - 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(bm_abs_sup_cdf(x), abs_sup_images(x), epsilon = 1e-9);
    }
    assert_eq!(bm_sup_cdf(-1.0), 0.0);
    assert_eq!(bm_abs_sup_cdf(0.0), 0.0);
}

#[test]
fn sup_laws_have_known_means() {
    // E X = ∫ (1 - F) for X >= 0.
    let sup_mean = simpson(|x| 1.0 - bm_sup_cdf(x), 0.0, 12.0, 20_000);
    assert_abs_diff_eq!(sup_mean, (2.0 / PI).sqrt(), epsilon = 1e-9);
    let abs_mean = simpson(|x| 1.0 - bm_abs_sup_cdf(x), 0.0, 12.0, 20_000);
    assert_abs_diff_eq!(abs_mean, (PI / 2.0).sqrt(), epsilon = 1e-9);
    // E sup|B| = √(π/2) ln 2 for the bridge.
    let bridge_mean = simpson(|x| 1.0 - kolmogorov_cdf(x), 0.0, 12.0, 20_000);
    assert_abs_diff_eq!(bridge_mean, (PI / 2.0).sqrt() * 2f64.ln(), epsilon = 1e-9);
}

#[test]
fn limit_law_dispatch() {
    assert_eq!(LimitLaw::BmSup.cdf(1.0), bm_sup_cdf(1.0));
    assert_eq!(LimitLaw::BridgeSup.cdf(1.0), kolmogorov_cdf(1.0));
    assert_abs_diff_eq!(
        LimitLaw::NormalMarginal { variance: 0.5 }.cdf(0.3),
        marsaglia_phi(0.3 / 0.5f64.sqrt()),
        epsilon = 1e-13
    );
    assert_abs_diff_eq!(
        LimitLaw::BridgeMarginal { p: 0.3 }.cdf(0.2),
        marsaglia_phi(0.2 / 0.21f64.sqrt()),
        epsilon = 1e-13
    );
}

fn min_eigenvalue(kernel: impl Fn(f64, f64) -> f64, points: &[f64]) -> f64 {
    let n = points.len();
    let m = DMatrix::from_fn(n, n, |i, j| kernel(points[i], points[j]));
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn covariance_kernels_are_psd() {
    let grid: Vec<f64> = (1..=16).map(|i| i as f64 / 16.0).collect();
    assert!(min_eigenvalue(bm_covariance, &grid) >= -1e-10);
    for spec in [DistributionSpec::uniform01(), DistributionSpec::standard(DistributionKind::Normal)] {
        let xs: Vec<f64> = (1..=16).map(|i| spec.quantile(i as f64 / 17.0).unwrap()).collect();
        assert!(min_eigenvalue(|s, t| bridge_covariance(s, t, &spec), &xs) >= -1e-10);
    }
    // Kiefer–Müller on (time, function) pairs: 8 times × 2 functions.
    let law = DistributionSpec::uniform01();
    let fns = [TestFunction::identity(), TestFunction::square()];
    let cells: Vec<(f64, usize)> =
        (1..=8).flat_map(|i| [(i as f64 / 8.0, 0), (i as f64 / 8.0, 1)]).collect();
    let m = DMatrix::from_fn(16, 16, |a, b| {
        let ((s, f), (t, g)) = (cells[a], cells[b]);
        kiefer_muller_covariance(s, t, &fns[f], &fns[g], &law).unwrap()
    });
    let min = SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min >= -1e-10, "min eigenvalue {min}");
}

#[test]
fn kiefer_muller_value_from_moments() {
    let law = DistributionSpec::uniform01();
    let (f, g) = (TestFunction::identity(), TestFunction::square());
    // ∫x·x² - ∫x·∫x² = 1/4 - 1/6 = 1/12, times s ∧ t = 1/2.
    let v = kiefer_muller_covariance(0.5, 1.0, &f, &g, &law).unwrap();
    assert_abs_diff_eq!(v, 1.0 / 24.0, epsilon = 1e-15);
    assert_abs_diff_eq!(bridge_covariance(0.3, 0.7, &law), 0.09, epsilon = 1e-15);
}

#[test]
fn partial_moments_match_quadrature() {
    let kinds = [
        DistributionKind::UniformCentered,
        DistributionKind::Normal,
        DistributionKind::ExponentialCentered,
        DistributionKind::Uniform01,
    ];
    for kind in kinds {
        for sigma in [0.5, 1.0, 2.0] {
            let spec = if kind == DistributionKind::Uniform01 {
                DistributionSpec::uniform01()
            } else {
                DistributionSpec::new(kind, sigma).unwrap()
            };
            let (pdf, lo, hi) = density(&spec);
            for j in 0..=4u32 {
                for frac in [0.1, 0.35, 0.5, 0.8, 1.0] {
                    let c = lo + frac * (hi - lo);
                    let quad = simpson(|x| x.powi(j as i32) * pdf(x), lo, c, 20_000);
                    let exact = spec.partial_moment(j, c).unwrap();
                    let scale = 1.0 + exact.abs();
                    assert!(
                        (quad - exact).abs() < 1e-8 * scale,
                        "{kind} sigma={sigma} j={j} c={c}: {quad} vs {exact}"
                    );
                }
                let full = spec.partial_moment(j, f64::INFINITY).unwrap();
                let quad = simpson(|x| x.powi(j as i32) * pdf(x), lo, hi, 40_000);
                assert!((quad - full).abs() < 1e-8 * (1.0 + full.abs()), "{kind} j={j}");
            }
        }
    }
}

#[test]
fn rademacher_moments_are_point_masses() {
    let r = DistributionSpec::new(DistributionKind::Rademacher, 2.0).unwrap();
    assert_eq!(r.partial_moment(1, 0.0).unwrap(), -1.0);
    assert_eq!(r.partial_moment(2, f64::INFINITY).unwrap(), 4.0);
    assert_eq!(r.partial_moment(3, -3.0).unwrap(), 0.0);
}

proptest! {
    #[test]
    fn normal_cdf_monotone_and_symmetric(x in -30.0f64..30.0, dx in 0.0f64..1.0) {
        prop_assert!(normal_cdf(x + dx) >= normal_cdf(x));
        prop_assert!((normal_cdf(x) + normal_cdf(-x) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cdfs_in_unit_interval(x in -5.0f64..10.0) {
        for v in [bm_sup_cdf(x), bm_abs_sup_cdf(x), kolmogorov_cdf(x)] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(bm_abs_sup_cdf(x) <= bm_sup_cdf(x) + 1e-15);
    }
}
