//! Analytic limit laws and covariance kernels.
//!
//! These are the targets the simulated processes are compared against:
//! Brownian motion marginals and supremum laws, the Kolmogorov law of
//! `sup |B|` for the Brownian bridge, and the covariance kernels of
//! Brownian motion, the bridge `B(F(x))` and the Kiefer–Müller field.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::Result;
use crate::processes::TestFunction;
use crate::sampling::DistributionSpec;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Kolmogorov series: stop once a term drops below this.
const KOLMOGOROV_TERM_EPS: f64 = 1e-12;
const KOLMOGOROV_MAX_TERMS: u32 = 100;
/// Below this point the alternating series needs more than the term cap;
/// the Jacobi-theta form converges in one or two terms there.
const KOLMOGOROV_SMALL_X: f64 = 0.2;

/// Standard normal distribution function Φ(x).
///
/// Evaluated as `erfc(-x/√2)/2`; the `erfc` rational approximations keep the
/// absolute error near machine precision over the whole line.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `P(sup_{[0,1]} W <= x) = 2Φ(x) - 1` for `x >= 0` (reflection principle).
pub fn bm_sup_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        // 2Φ(x) - 1 = erf(x/√2), computed without the cancellation near 0.
        1.0 - erfc(x * FRAC_1_SQRT_2)
    }
}

/// `P(sup_{[0,1]} |W| <= x)`.
pub fn bm_abs_sup_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for k in 0..200u32 {
        let odd = f64::from(2 * k + 1);
        let term = (-odd * odd * PI * PI / (8.0 * x * x)).exp() / odd;
        if k % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        if term < 1e-15 {
            break;
        }
    }
    (4.0 / PI * acc).clamp(0.0, 1.0)
}

/// Kolmogorov distribution `K(x) = 1 - 2 Σ_{k>=1} (-1)^{k-1} e^{-2k²x²}`.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < KOLMOGOROV_SMALL_X {
        // √(2π)/x Σ e^{-(2k-1)²π²/(8x²)}; the first term is already < 1e-50.
        let lead = (-PI * PI / (8.0 * x * x)).exp();
        return ((2.0 * PI).sqrt() / x * lead).clamp(0.0, 1.0);
    }
    let mut acc = 0.0;
    for k in 1..=KOLMOGOROV_MAX_TERMS {
        let kf = f64::from(k);
        let term = (-2.0 * kf * kf * x * x).exp();
        if k % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
        if term < KOLMOGOROV_TERM_EPS {
            break;
        }
    }
    (1.0 - 2.0 * acc).clamp(0.0, 1.0)
}

/// Inverse of [`kolmogorov_cdf`] by bisection; `kolmogorov_quantile(0.99) ≈ 1.6276`.
pub fn kolmogorov_quantile(p: f64) -> f64 {
    assert!((0.0..1.0).contains(&p), "probability must be in [0, 1)");
    let (mut lo, mut hi) = (0.0_f64, 10.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Covariance of the limiting empirical process `B(F(x))`: `min{F(s),F(t)} - F(s)F(t)`.
pub fn bridge_covariance(s: f64, t: f64, truth: &DistributionSpec) -> f64 {
    let (fs, ft) = (truth.cdf(s), truth.cdf(t));
    fs.min(ft) - fs * ft
}

/// Brownian motion covariance `s ∧ t`.
pub fn bm_covariance(s: f64, t: f64) -> f64 {
    s.min(t)
}

/// Kiefer–Müller covariance `(s ∧ t)(Pfg - Pf Pg)` under `law`.
pub fn kiefer_muller_covariance(
    s: f64,
    t: f64,
    f: &TestFunction,
    g: &TestFunction,
    law: &DistributionSpec,
) -> Result<f64> {
    let pf = f.expectation(law)?;
    let pg = g.expectation(law)?;
    let pfg = f.product_expectation(g, law)?;
    Ok(s.min(t) * (pfg - pf * pg))
}

/// A limiting law with a closed-form distribution function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LimitLaw {
    /// `N(0, variance)`, e.g. `W(t) ~ N(0, t)`.
    NormalMarginal { variance: f64 },
    /// `sup_{[0,1]} W`.
    BmSup,
    /// `sup_{[0,1]} |W|`.
    BmAbsSup,
    /// `sup |B|` for the Brownian bridge (Kolmogorov law).
    BridgeSup,
    /// `B(p) ~ N(0, p(1-p))`.
    BridgeMarginal { p: f64 },
}

impl LimitLaw {
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::NormalMarginal { variance } => scaled_normal_cdf(x, variance),
            LimitLaw::BmSup => bm_sup_cdf(x),
            LimitLaw::BmAbsSup => bm_abs_sup_cdf(x),
            LimitLaw::BridgeSup => kolmogorov_cdf(x),
            LimitLaw::BridgeMarginal { p } => scaled_normal_cdf(x, p * (1.0 - p)),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            LimitLaw::NormalMarginal { variance } => format!("N(0,{variance})"),
            LimitLaw::BmSup => "sup W".to_string(),
            LimitLaw::BmAbsSup => "sup |W|".to_string(),
            LimitLaw::BridgeSup => "Kolmogorov".to_string(),
            LimitLaw::BridgeMarginal { p } => format!("B({p})"),
        }
    }
}

fn scaled_normal_cdf(x: f64, variance: f64) -> f64 {
    if variance <= 0.0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    normal_cdf(x / variance.sqrt())
}
