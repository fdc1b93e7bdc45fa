//! Seeded i.i.d. sampling from a small catalog of laws.
//!
//! Every replication owns a [`SeededStream`]. The stream is turned into a
//! ChaCha8 generator whose 256-bit key is expanded from the seed and whose
//! 64-bit stream word is the stream id, so substreams are addressed directly
//! instead of by jumping a single sequence. Output depends only on
//! `(seed, stream_id)` and never on which worker thread draws it.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::{normal_cdf, normal_pdf};

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Law families available to the samplers.
///
/// The first four are centered with variance `sigma²`. `Uniform01` is the
/// standard uniform on `[0, 1]`; it is not centered and is only meant for the
/// empirical-process constructions, which allow an arbitrary df.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Rademacher,
    UniformCentered,
    Normal,
    ExponentialCentered,
    Uniform01,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 5] = [
        DistributionKind::Rademacher,
        DistributionKind::UniformCentered,
        DistributionKind::Normal,
        DistributionKind::ExponentialCentered,
        DistributionKind::Uniform01,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Rademacher => "rademacher",
            DistributionKind::UniformCentered => "uniform_centered",
            DistributionKind::Normal => "normal",
            DistributionKind::ExponentialCentered => "exponential_centered",
            DistributionKind::Uniform01 => "uniform01",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistributionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistributionKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown distribution `{s}`")))
    }
}

/// A law together with its standard deviation.
///
/// Moments are analytic: `mean()` and `variance()` are exact, never estimated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    kind: DistributionKind,
    sigma: f64,
}

impl DistributionSpec {
    pub fn new(kind: DistributionKind, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::config(format!("sigma must be positive and finite, got {sigma}")));
        }
        if kind == DistributionKind::Uniform01 && (sigma - UNIFORM01_SIGMA).abs() > 1e-9 {
            return Err(Error::config(format!(
                "uniform01 has fixed sigma 1/sqrt(12), got {sigma}"
            )));
        }
        Ok(DistributionSpec { kind, sigma })
    }

    /// Standard uniform on [0, 1].
    pub fn uniform01() -> Self {
        DistributionSpec { kind: DistributionKind::Uniform01, sigma: UNIFORM01_SIGMA }
    }

    /// Default spec for a kind: sigma = 1 for centered laws, 1/sqrt(12) for uniform01.
    pub fn standard(kind: DistributionKind) -> Self {
        match kind {
            DistributionKind::Uniform01 => Self::uniform01(),
            _ => DistributionSpec { kind, sigma: 1.0 },
        }
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn mean(&self) -> f64 {
        match self.kind {
            DistributionKind::Uniform01 => 0.5,
            _ => 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn is_centered(&self) -> bool {
        self.kind != DistributionKind::Uniform01
    }

    pub fn is_continuous(&self) -> bool {
        self.kind != DistributionKind::Rademacher
    }

    /// Distribution function F(x).
    pub fn cdf(&self, x: f64) -> f64 {
        let s = self.sigma;
        match self.kind {
            DistributionKind::Rademacher => {
                if x < -s {
                    0.0
                } else if x < s {
                    0.5
                } else {
                    1.0
                }
            }
            DistributionKind::UniformCentered => {
                let a = SQRT3 * s;
                ((x + a) / (2.0 * a)).clamp(0.0, 1.0)
            }
            DistributionKind::Normal => normal_cdf(x / s),
            DistributionKind::ExponentialCentered => {
                let u = x / s + 1.0;
                if u <= 0.0 {
                    0.0
                } else {
                    -(-u).exp_m1()
                }
            }
            DistributionKind::Uniform01 => x.clamp(0.0, 1.0),
        }
    }

    /// Quantile function F⁻¹(p) for continuous laws.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("probability {p} outside [0, 1]")));
        }
        let s = self.sigma;
        match self.kind {
            DistributionKind::Rademacher => {
                Err(Error::domain("rademacher has no continuous quantile function"))
            }
            DistributionKind::UniformCentered => Ok((2.0 * p - 1.0) * SQRT3 * s),
            DistributionKind::Normal => {
                use statrs::distribution::{ContinuousCDF, Normal};
                let law = Normal::new(0.0, s).expect("sigma validated");
                Ok(law.inverse_cdf(p))
            }
            DistributionKind::ExponentialCentered => Ok(s * (-(-p).ln_1p() - 1.0)),
            DistributionKind::Uniform01 => Ok(p),
        }
    }

    /// Partial moment `E[X^j 1{X <= c}]`, with `c = +inf` giving the full moment.
    ///
    /// Supported for `j <= 4`, which covers every product of two functions in
    /// the sequential-field catalog.
    pub fn partial_moment(&self, j: u32, c: f64) -> Result<f64> {
        if j > MAX_MOMENT {
            return Err(Error::config(format!("no analytic moment of order {j}")));
        }
        if c.is_nan() {
            return Err(Error::domain("cutoff is NaN"));
        }
        let s = self.sigma;
        let value = match self.kind {
            DistributionKind::Rademacher => {
                let mut acc = 0.0;
                for point in [-s, s] {
                    if point <= c {
                        acc += 0.5 * point.powi(j as i32);
                    }
                }
                acc
            }
            DistributionKind::UniformCentered => uniform_partial(j, -SQRT3 * s, SQRT3 * s, c),
            DistributionKind::Uniform01 => uniform_partial(j, 0.0, 1.0, c),
            DistributionKind::Normal => s.powi(j as i32) * std_normal_partial(j, c / s),
            DistributionKind::ExponentialCentered => {
                s.powi(j as i32) * shifted_exp_partial(j, c / s + 1.0)
            }
        };
        Ok(value)
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.sigma;
        match self.kind {
            DistributionKind::Rademacher => {
                if rng.random::<bool>() {
                    s
                } else {
                    -s
                }
            }
            DistributionKind::UniformCentered => (2.0 * rng.random::<f64>() - 1.0) * SQRT3 * s,
            DistributionKind::Normal => s * rng.sample::<f64, _>(StandardNormal),
            DistributionKind::ExponentialCentered => s * (rng.sample::<f64, _>(Exp1) - 1.0),
            DistributionKind::Uniform01 => rng.random::<f64>(),
        }
    }
}

const UNIFORM01_SIGMA: f64 = 0.288_675_134_594_812_9;
const MAX_MOMENT: u32 = 4;

fn uniform_partial(j: u32, a: f64, b: f64, c: f64) -> f64 {
    let v = c.clamp(a, b);
    let p = (j + 1) as i32;
    (v.powi(p) - a.powi(p)) / (f64::from(j + 1) * (b - a))
}

/// `∫_{-inf}^{z} x^j φ(x) dx` via `I_j = -z^{j-1} φ(z) + (j-1) I_{j-2}`.
fn std_normal_partial(j: u32, z: f64) -> f64 {
    if z == f64::INFINITY {
        // Full moments: 1, 0, 1, 0, 3.
        return match j {
            0 | 2 => 1.0,
            4 => 3.0,
            _ => 0.0,
        };
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let pdf = normal_pdf(z);
    let mut prev2 = normal_cdf(z); // I_0
    if j == 0 {
        return prev2;
    }
    let mut prev1 = -pdf; // I_1
    for m in 2..=j {
        let next = -z.powi(m as i32 - 1) * pdf + f64::from(m - 1) * prev2;
        prev2 = prev1;
        prev1 = next;
    }
    prev1
}

/// `∫_0^u (e - 1)^j e^{-e} de` for an Exp(1) variable.
fn shifted_exp_partial(j: u32, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..=j {
        let binom = binomial(j, i);
        let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * lower_gamma_int(i, u);
    }
    acc
}

/// Lower incomplete gamma `γ(i + 1, u) = i! (1 - e^{-u} Σ_{l<=i} u^l / l!)`.
fn lower_gamma_int(i: u32, u: f64) -> f64 {
    let fact: f64 = (1..=i).map(f64::from).product();
    if u == f64::INFINITY {
        return fact;
    }
    let mut term = 1.0;
    let mut series = 1.0;
    for l in 1..=i {
        term *= u / f64::from(l);
        series += term;
    }
    fact * (1.0 - (-u).exp() * series)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Identifies one independent random substream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SeededStream { seed, stream_id }
    }

    /// A stream with the same id but a key separated by `tag`.
    ///
    /// Used to give the sampler and the deletion planner of one replication
    /// unrelated randomness.
    pub fn derive(&self, tag: u64) -> Self {
        SeededStream { seed: splitmix64(self.seed ^ splitmix64(tag)), stream_id: self.stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        let mut state = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A finite i.i.d. draw ξ₁..ξₙ together with the law it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSequence {
    values: Vec<f64>,
    spec: DistributionSpec,
}

impl SampleSequence {
    pub fn new(values: Vec<f64>, spec: DistributionSpec) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("sample sequence must be non-empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("sample value {i} is not finite")));
        }
        Ok(SampleSequence { values, spec })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Draws `n` i.i.d. values from `spec` using `stream`.
pub fn draw_iid(spec: &DistributionSpec, n: usize, stream: SeededStream) -> Result<SampleSequence> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let mut rng = stream.rng();
    let values = (0..n).map(|_| spec.sample_one(&mut rng)).collect();
    Ok(SampleSequence { values, spec: *spec })
}
