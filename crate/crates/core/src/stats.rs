//! Hypothesis tests and estimators over replication data.
//!
//! Everything here is deterministic in its input arrays. Sums go through
//! [`pairwise_sum`], which fixes the reduction order independently of how the
//! replications were produced.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{kolmogorov_cdf, kolmogorov_quantile, normal_cdf};

/// Minimum number of values for a KS test.
pub const KS_MIN_SAMPLES: usize = 100;
/// Default |z| threshold for z-style tests.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Outcome of one statistical check: `pass` iff `statistic <= threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub n_samples: usize,
    pub verdict: Verdict,
    /// The verdict the experiment requires; negative controls expect `fail`.
    pub expected: Verdict,
    /// Probability of `fail` under the null hypothesis the test is built on.
    pub nominal_alpha: f64,
    pub context: String,
}

impl TestReport {
    pub fn new(
        name: impl Into<String>,
        statistic: f64,
        threshold: f64,
        n_samples: usize,
        nominal_alpha: f64,
        context: impl Into<String>,
    ) -> Self {
        let verdict = if statistic <= threshold { Verdict::Pass } else { Verdict::Fail };
        TestReport {
            name: name.into(),
            statistic,
            threshold,
            n_samples,
            verdict,
            expected: Verdict::Pass,
            nominal_alpha,
            context: context.into(),
        }
    }

    pub fn expecting(mut self, expected: Verdict) -> Self {
        self.expected = expected;
        self
    }

    pub fn met_expectation(&self) -> bool {
        self.verdict == self.expected
    }
}

/// Sum with a fixed binary-tree order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() as f64 - 1.0)
}

/// Two-sided tail of a standard normal at `z`.
pub fn two_sided_normal_alpha(z: f64) -> f64 {
    2.0 * normal_cdf(-z.abs())
}

/// Asymptotic level of a KS test with threshold `factor / √M`.
pub fn ks_alpha(factor: f64) -> f64 {
    1.0 - kolmogorov_cdf(factor)
}

/// `sup_x |F̂_M(x) - F(x)|`, evaluated at the jump points of the empirical df.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::domain("KS statistic needs at least one value"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("KS input contains non-finite values"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let above = (i + 1) as f64 / m - f;
        let below = f - i as f64 / m;
        d = d.max(above).max(below);
    }
    Ok(d)
}

/// One-sample KS test at the asymptotic 1% level (`threshold = K⁻¹(0.99)/√M`).
pub fn ks_one_sample(values: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestReport> {
    ks_one_sample_with(values, cdf, kolmogorov_quantile(0.99))
}

/// One-sample KS test with `threshold = factor / √M`.
pub fn ks_one_sample_with(
    values: &[f64],
    cdf: impl Fn(f64) -> f64,
    factor: f64,
) -> Result<TestReport> {
    if values.len() < KS_MIN_SAMPLES {
        return Err(Error::domain(format!(
            "KS test needs at least {KS_MIN_SAMPLES} values, got {}",
            values.len()
        )));
    }
    let d = ks_statistic(values, cdf)?;
    let m = values.len();
    Ok(TestReport::new(
        "ks",
        d,
        factor / (m as f64).sqrt(),
        m,
        ks_alpha(factor),
        format!("one-sample KS, threshold {factor}/sqrt(M)"),
    ))
}

/// Sample covariance with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

impl CovarianceEstimate {
    /// `|estimate - target| / std_error` (0 when both the gap and the error vanish).
    pub fn z_score(&self, target: f64) -> f64 {
        z_score(self.estimate - target, self.std_error)
    }
}

fn z_score(gap: f64, se: f64) -> f64 {
    if gap == 0.0 {
        0.0
    } else if se > 0.0 {
        gap.abs() / se
    } else {
        f64::INFINITY
    }
}

/// Covariance of paired replications with a leave-one-out jackknife error.
pub fn estimate_covariance(xs: &[f64], ys: &[f64]) -> Result<CovarianceEstimate> {
    if xs.len() != ys.len() {
        return Err(Error::domain("covariance inputs differ in length"));
    }
    let m = xs.len();
    if m < 2 {
        return Err(Error::domain("covariance needs at least 2 replications"));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let dx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
    let dy: Vec<f64> = ys.iter().map(|y| y - my).collect();
    let prod: Vec<f64> = dx.iter().zip(&dy).map(|(a, b)| a * b).collect();
    let (sx, sy, sxy) = (pairwise_sum(&dx), pairwise_sum(&dy), pairwise_sum(&prod));
    let mf = m as f64;
    let estimate = (sxy - sx * sy / mf) / (mf - 1.0);
    if m < 3 {
        return Ok(CovarianceEstimate { estimate, std_error: f64::INFINITY });
    }
    let k = mf - 1.0;
    let loo: Vec<f64> = (0..m)
        .map(|i| {
            let (a, b, c) = (sx - dx[i], sy - dy[i], sxy - prod[i]);
            (c - a * b / k) / (k - 1.0)
        })
        .collect();
    let loo_mean = mean(&loo);
    let dev: Vec<f64> = loo.iter().map(|c| (c - loo_mean) * (c - loo_mean)).collect();
    let std_error = ((mf - 1.0) / mf * pairwise_sum(&dev)).sqrt();
    Ok(CovarianceEstimate { estimate, std_error })
}

/// Per-replication values of a path on a common grid (one row per replication).
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationMatrix {
    cols: usize,
    data: Vec<f64>,
}

impl ReplicationMatrix {
    pub fn new(cols: usize) -> Self {
        ReplicationMatrix { cols, data: Vec::new() }
    }

    pub fn from_rows<I, R>(cols: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: AsRef<[f64]>,
    {
        let mut m = ReplicationMatrix::new(cols);
        for row in rows {
            m.push_row(row.as_ref())?;
        }
        Ok(m)
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.cols {
            return Err(Error::domain(format!(
                "row has {} values, matrix has {} columns",
                row.len(),
                self.cols
            )));
        }
        self.data.extend_from_slice(row);
        Ok(())
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.data.len() / self.cols
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        assert!(c < self.cols, "column {c} out of range");
        self.data.iter().skip(c).step_by(self.cols).copied().collect()
    }

    /// Covariance across replications between grid columns `s` and `t`.
    pub fn covariance(&self, s: usize, t: usize) -> Result<CovarianceEstimate> {
        estimate_covariance(&self.column(s), &self.column(t))
    }
}

/// Tests independence of `path(t1) - path(t0)` and `path(t2) - path(t1)`.
///
/// Statistic `|ρ̂| √M`; `threshold` is 4 for the independence null.
pub fn increment_correlation_test(
    at_t0: &[f64],
    at_t1: &[f64],
    at_t2: &[f64],
    threshold: f64,
) -> Result<TestReport> {
    let m = at_t0.len();
    if at_t1.len() != m || at_t2.len() != m {
        return Err(Error::domain("increment columns differ in length"));
    }
    if m < 3 {
        return Err(Error::domain("increment test needs at least 3 replications"));
    }
    let first: Vec<f64> = at_t1.iter().zip(at_t0).map(|(b, a)| b - a).collect();
    let second: Vec<f64> = at_t2.iter().zip(at_t1).map(|(c, b)| c - b).collect();
    let (v1, v2) = (sample_variance(&first), sample_variance(&second));
    if v1 <= 0.0 || v2 <= 0.0 {
        return Err(Error::domain("an increment has zero variance"));
    }
    let cov = estimate_covariance(&first, &second)?.estimate;
    let rho = cov / (v1 * v2).sqrt();
    let stat = rho.abs() * (m as f64).sqrt();
    Ok(TestReport::new(
        "increment_correlation",
        stat,
        threshold,
        m,
        two_sided_normal_alpha(threshold),
        format!("rho = {rho:.6}, statistic |rho|*sqrt(M)"),
    ))
}

/// Path functionals evaluated on grid values over `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Sup,
    AbsSup,
    Terminal,
    /// `∫_0^1 |x(t)| dt` for the piecewise-linear interpolant of the grid values.
    MeanAbs,
}

impl Functional {
    pub const ALL: [Functional; 4] =
        [Functional::Sup, Functional::AbsSup, Functional::Terminal, Functional::MeanAbs];

    pub fn as_str(self) -> &'static str {
        match self {
            Functional::Sup => "sup",
            Functional::AbsSup => "abs_sup",
            Functional::Terminal => "terminal",
            Functional::MeanAbs => "mean_abs",
        }
    }

    pub fn apply(self, values: &[f64]) -> f64 {
        match self {
            Functional::Sup => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Functional::AbsSup => values.iter().fold(0.0, |acc, v| acc.max(v.abs())),
            Functional::Terminal => *values.last().expect("non-empty path"),
            Functional::MeanAbs => {
                let h = 1.0 / (values.len() - 1) as f64;
                let pieces: Vec<f64> = values.windows(2).map(|w| abs_linear_integral(w[0], w[1], h)).collect();
                pairwise_sum(&pieces)
            }
        }
    }
}

/// `∫ |a + (b - a) s/h| ds` over `[0, h]`.
fn abs_linear_integral(a: f64, b: f64, h: f64) -> f64 {
    if a * b >= 0.0 {
        0.5 * h * (a.abs() + b.abs())
    } else {
        0.5 * h * (a * a + b * b) / (a.abs() + b.abs())
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Functional::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown functional `{s}`")))
    }
}

/// Checks `E f(path) = oracle_value` up to an allowance `oracle_tol`.
///
/// Statistic `max(|mean - oracle| - oracle_tol, 0) / std_error`; threshold 4.
pub fn functional_expectation_check(
    paths: &ReplicationMatrix,
    functional: Functional,
    oracle_value: f64,
    oracle_tol: f64,
) -> Result<TestReport> {
    let values: Vec<f64> = (0..paths.rows()).map(|r| functional.apply(paths.row(r))).collect();
    let mut report = mean_check(&values, oracle_value, oracle_tol)?;
    report.name = functional.as_str().to_string();
    Ok(report)
}

/// Z-style check of a sample mean against a target with an additive allowance.
pub fn mean_check(values: &[f64], oracle_value: f64, oracle_tol: f64) -> Result<TestReport> {
    if !oracle_value.is_finite() || !(oracle_tol >= 0.0) {
        return Err(Error::config("oracle value must be finite and allowance non-negative"));
    }
    if values.len() < 2 {
        return Err(Error::domain("mean check needs at least 2 values"));
    }
    let m = values.len();
    let avg = mean(values);
    let se = (sample_variance(values) / m as f64).sqrt();
    let gap = ((avg - oracle_value).abs() - oracle_tol).max(0.0);
    Ok(TestReport::new(
        "mean",
        z_score(gap, se),
        Z_THRESHOLD,
        m,
        two_sided_normal_alpha(Z_THRESHOLD),
        format!("mean {avg:.6} vs oracle {oracle_value:.6} (allowance {oracle_tol:.6}, se {se:.6})"),
    ))
}

/// Z-style check of a covariance estimate against a target.
pub fn covariance_check(est: CovarianceEstimate, target: f64, m: usize) -> TestReport {
    TestReport::new(
        "covariance",
        est.z_score(target),
        Z_THRESHOLD,
        m,
        two_sided_normal_alpha(Z_THRESHOLD),
        format!(
            "estimate {:.6} vs target {target:.6} (jackknife se {:.6})",
            est.estimate, est.std_error
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::normal_cdf;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn constant_values_fail_ks() {
        let vals = vec![0.3; 200];
        let r = ks_one_sample(&vals, normal_cdf).unwrap();
        assert!(r.statistic >= 0.5);
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(ks_one_sample(&vals[..99], normal_cdf).is_err());
    }

    #[test]
    fn ks_statistic_small_exact() {
        // Uniform cdf, values {0.25, 0.75}: deviations 0.25 at every jump.
        let d = ks_statistic(&[0.75, 0.25], |x| x.clamp(0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(d, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn covariance_degenerate_and_diagonal() {
        let zeros = vec![0.0; 50];
        let c = estimate_covariance(&zeros, &zeros).unwrap();
        assert_eq!((c.estimate, c.std_error), (0.0, 0.0));
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).cos()).collect();
        let c = estimate_covariance(&xs, &xs).unwrap();
        assert_abs_diff_eq!(c.estimate, sample_variance(&xs), epsilon = 1e-14);
        assert!(estimate_covariance(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn jackknife_matches_brute_force() {
        let xs: Vec<f64> = (0..25).map(|i| (i as f64 * 1.3).sin()).collect();
        let ys: Vec<f64> = (0..25).map(|i| (i as f64 * 0.4).cos() + xs[i]).collect();
        let cov = |a: &[f64], b: &[f64]| {
            let (ma, mb) = (a.iter().sum::<f64>() / a.len() as f64, b.iter().sum::<f64>() / b.len() as f64);
            a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / (a.len() as f64 - 1.0)
        };
        let loo: Vec<f64> = (0..25)
            .map(|i| {
                let a: Vec<f64> = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                let b: Vec<f64> = ys.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| *v).collect();
                cov(&a, &b)
            })
            .collect();
        let lm = loo.iter().sum::<f64>() / 25.0;
        let se = (24.0 / 25.0 * loo.iter().map(|c| (c - lm).powi(2)).sum::<f64>()).sqrt();
        let est = estimate_covariance(&xs, &ys).unwrap();
        assert_abs_diff_eq!(est.estimate, cov(&xs, &ys), epsilon = 1e-14);
        assert_abs_diff_eq!(est.std_error, se, epsilon = 1e-12);
    }

    #[test]
    fn zero_variance_increment_is_error() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|x| x * 2.0).collect();
        assert!(matches!(
            increment_correlation_test(&a, &b, &b, 4.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn functionals_on_simple_path() {
        let path = [0.0, 1.0, -1.0, 0.5];
        assert_eq!(Functional::Sup.apply(&path), 1.0);
        assert_eq!(Functional::AbsSup.apply(&path), 1.0);
        assert_eq!(Functional::Terminal.apply(&path), 0.5);
        // h = 1/3: [0,1] -> 1/6, [1,-1] -> 1/6, [-1,0.5] -> (1.25/1.5)/6.
        let expect = 1.0 / 6.0 + 1.0 / 6.0 + 1.25 / 1.5 / 6.0;
        assert_abs_diff_eq!(Functional::MeanAbs.apply(&path), expect, epsilon = 1e-15);
        assert!("median".parse::<Functional>().is_err());
    }

    #[test]
    fn mean_check_gross_mismatch_fails() {
        let vals: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.77).sin()).collect();
        let r = mean_check(&vals, 10.0, 0.0).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(mean_check(&vals, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs: Vec<f64> = (1..=10_000).map(|i| 1.0 / i as f64).collect();
        let exact: f64 = xs.iter().rev().sum();
        assert_abs_diff_eq!(pairwise_sum(&xs), exact, epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn ks_is_permutation_invariant(mut vals in prop::collection::vec(-3.0f64..3.0, 100..300), seed in any::<u64>()) {
            let d1 = ks_statistic(&vals, normal_cdf).unwrap();
            let len = vals.len();
            for i in 0..len {
                let j = (seed as usize).wrapping_mul(i + 7) % len;
                vals.swap(i, j);
            }
            let d2 = ks_statistic(&vals, normal_cdf).unwrap();
            prop_assert_eq!(d1, d2);
            prop_assert!((0.0..=1.0).contains(&d1));
        }

        #[test]
        fn ks_duplicate_moves_little(vals in prop::collection::vec(-3.0f64..3.0, 100..300), pick in any::<prop::sample::Index>()) {
            let d1 = ks_statistic(&vals, normal_cdf).unwrap();
            let mut more = vals.clone();
            more.push(vals[pick.index(vals.len())]);
            let d2 = ks_statistic(&more, normal_cdf).unwrap();
            prop_assert!(d2 >= d1 - 1.0 / vals.len() as f64 - 1e-12);
        }

        #[test]
        fn covariance_is_symmetric(pairs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..200)) {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let a = estimate_covariance(&xs, &ys).unwrap();
            let b = estimate_covariance(&ys, &xs).unwrap();
            prop_assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
            prop_assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
        }
    }
}
