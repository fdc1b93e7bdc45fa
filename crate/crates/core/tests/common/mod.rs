//! Independent reference implementations shared by the integration tests.
//! None of these call into the library's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

use donsker::deletion::DeletionPlan;
use donsker::sampling::{DistributionKind, DistributionSpec};

/// Φ(x) = 1/2 + φ(x) Σ_{k>=0} x^{2k+1} / (1·3·5···(2k+1)).
pub fn marsaglia_phi(x: f64) -> f64 {
    // Beyond 9 the tails are below 1e-18 and the series overflows.
    if x.abs() > 9.0 {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    let pdf = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    while term.abs() > 1e-17 * sum.abs().max(1e-300) {
        k += 1.0;
        term *= x * x / (2.0 * k + 1.0);
        sum += term;
    }
    0.5 + pdf * sum
}

/// Kolmogorov cdf by the alternating series truncated at 1000 terms.
pub fn kolmogorov_deep(x: f64) -> f64 {
    let mut acc = 0.0;
    for k in (1..=1000).rev() {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * x * x).exp();
        acc += if k % 2 == 1 { term } else { -term };
    }
    1.0 - 2.0 * acc
}

/// Kolmogorov cdf by the Jacobi theta form √(2π)/x Σ_k e^{-(2k-1)²π²/(8x²)}.
pub fn kolmogorov_theta(x: f64) -> f64 {
    let s: f64 = (1..=60)
        .map(|k| {
            let o = f64::from(2 * k - 1);
            (-o * o * PI * PI / (8.0 * x * x)).exp()
        })
        .sum();
    (2.0 * PI).sqrt() / x * s
}

/// P(sup |W| <= x) by the method of images: Σ_k (-1)^k [Φ((2k+1)x) - Φ((2k-1)x)].
pub fn abs_sup_images(x: f64) -> f64 {
    let reach = (10.0 / x).ceil() as i32 + 2;
    (-reach..=reach)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let kf = f64::from(k);
            sign * (marsaglia_phi((2.0 * kf + 1.0) * x) - marsaglia_phi((2.0 * kf - 1.0) * x))
        })
        .sum()
}

/// Composite Simpson rule with `2 * half` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, half: usize) -> f64 {
    let n = 2 * half;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Density of a continuous catalog law and its support.
pub fn density(spec: &DistributionSpec) -> (Box<dyn Fn(f64) -> f64>, f64, f64) {
    let s = spec.sigma();
    match spec.kind() {
        DistributionKind::UniformCentered => {
            let a = 3f64.sqrt() * s;
            (Box::new(move |_| 1.0 / (2.0 * a)), -a, a)
        }
        DistributionKind::Uniform01 => (Box::new(|_| 1.0), 0.0, 1.0),
        DistributionKind::Normal => (
            Box::new(move |x: f64| (-0.5 * (x / s).powi(2)).exp() / (s * (2.0 * PI).sqrt())),
            -12.0 * s,
            12.0 * s,
        ),
        DistributionKind::ExponentialCentered => {
            (Box::new(move |x: f64| (-(x / s + 1.0)).exp() / s), -s, 45.0 * s)
        }
        DistributionKind::Rademacher => panic!("no density"),
    }
}

/// Deleted sets read directly off a plan, 1-based, as ordinary sets.
pub fn deleted_sets(plan: &DeletionPlan) -> Vec<Vec<usize>> {
    (0..=plan.grid_size()).map(|g| plan.deleted(g)).collect()
}

/// `Σ_{i <= m, i ∉ deleted} w_i`, straight from the definition.
pub fn brute_sum(w: &[f64], m: usize, deleted: &[usize]) -> f64 {
    (1..=m).filter(|i| !deleted.contains(i)).map(|i| w[i - 1]).sum()
}

/// `⌊n g / grid⌋` without the library's helper.
pub fn floor_nt(n: usize, g: usize, grid: usize) -> usize {
    n * g / grid
}
