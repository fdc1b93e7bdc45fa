use std::fmt;
use std::io::Write;
use std::sync::Arc;

use super::{grid_times, running_sums};
use crate::deletion::{prefix_len, DeletionPlan};
use crate::error::{Error, Result};
use crate::sampling::{DistributionSpec, SampleSequence};

/// Test function `f` for sequential empirical processes.
///
/// Catalog functions are `x^p 1{x <= c}` monomials (identity, square,
/// indicator), whose `Pf` and pairwise `Pfg` come in closed form from the
/// law's partial moments. `Custom` functions carry an optional `Pf` only.
#[derive(Clone)]
pub enum TestFunction {
    Monomial { power: u32, cutoff: Option<f64> },
    Custom { name: String, func: Arc<dyn Fn(f64) -> f64 + Send + Sync>, mean: Option<f64> },
}

impl TestFunction {
    pub fn identity() -> Self {
        TestFunction::Monomial { power: 1, cutoff: None }
    }

    pub fn square() -> Self {
        TestFunction::Monomial { power: 2, cutoff: None }
    }

    pub fn indicator(c: f64) -> Self {
        TestFunction::Monomial { power: 0, cutoff: Some(c) }
    }

    pub fn custom(
        name: impl Into<String>,
        func: impl Fn(f64) -> f64 + Send + Sync + 'static,
        mean: Option<f64>,
    ) -> Self {
        TestFunction::Custom { name: name.into(), func: Arc::new(func), mean }
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::Monomial { power: 1, cutoff: None } => "identity".into(),
            TestFunction::Monomial { power: 2, cutoff: None } => "square".into(),
            TestFunction::Monomial { power: 0, cutoff: Some(c) } => format!("indicator({c})"),
            TestFunction::Monomial { power, cutoff: None } => format!("x^{power}"),
            TestFunction::Monomial { power, cutoff: Some(c) } => format!("x^{power}*indicator({c})"),
            TestFunction::Custom { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Monomial { power, cutoff } => {
                if cutoff.is_none_or(|c| x <= c) {
                    x.powi(*power as i32)
                } else {
                    0.0
                }
            }
            TestFunction::Custom { func, .. } => func(x),
        }
    }

    /// `Pf` under `law`.
    pub fn expectation(&self, law: &DistributionSpec) -> Result<f64> {
        match self {
            TestFunction::Monomial { power, cutoff } => {
                law.partial_moment(*power, cutoff.unwrap_or(f64::INFINITY))
            }
            TestFunction::Custom { name, mean, .. } => {
                mean.ok_or_else(|| Error::config(format!("test function `{name}` has no analytic mean")))
            }
        }
    }

    /// `P(fg)` under `law`.
    pub fn product_expectation(&self, other: &TestFunction, law: &DistributionSpec) -> Result<f64> {
        match (self, other) {
            (
                TestFunction::Monomial { power: p, cutoff: c },
                TestFunction::Monomial { power: q, cutoff: d },
            ) => {
                let cut = match (c, d) {
                    (Some(a), Some(b)) => a.min(*b),
                    (Some(a), None) | (None, Some(a)) => *a,
                    (None, None) => f64::INFINITY,
                };
                law.partial_moment(p + q, cut)
            }
            _ => Err(Error::config(format!(
                "no analytic product moment for `{}` and `{}`",
                self.name(),
                other.name()
            ))),
        }
    }
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({})", self.name())
    }
}

/// Values of `Z(t_g, f_j)` on a time grid for a list of test functions.
#[derive(Debug, Clone)]
pub struct SequentialField {
    pub times: Vec<f64>,
    pub functions: Vec<TestFunction>,
    /// Row-major: `values[g * functions.len() + j]`.
    pub values: Vec<f64>,
}

impl SequentialField {
    pub fn get(&self, g: usize, j: usize) -> f64 {
        self.values[g * self.functions.len() + j]
    }

    /// Writes `t,f_name,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "f_name", "value"])?;
        let names: Vec<String> = self.functions.iter().map(TestFunction::name).collect();
        for (g, t) in self.times.iter().enumerate() {
            for (j, name) in names.iter().enumerate() {
                w.write_record([t.to_string(), name.clone(), self.get(g, j).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// `Z_n(t, f) = n^{-1/2} Σ_{i <= ⌊nt⌋, i ∉ deleted(t)} (f(ξ_i) - Pf)`.
pub fn build_sequential_field(
    sample: &SampleSequence,
    functions: &[TestFunction],
    grid_size: usize,
    plan: Option<&DeletionPlan>,
) -> Result<SequentialField> {
    if grid_size == 0 {
        return Err(Error::domain("grid_size must be at least 1"));
    }
    let n = sample.len();
    if let Some(plan) = plan {
        if plan.n() != n || plan.grid_size() != grid_size {
            return Err(Error::domain(format!(
                "plan is for (n, grid) = ({}, {}), requested ({n}, {grid_size})",
                plan.n(),
                plan.grid_size()
            )));
        }
    }
    let means = functions
        .iter()
        .map(|f| f.expectation(sample.spec()))
        .collect::<Result<Vec<_>>>()?;
    let root_n = (n as f64).sqrt();
    let nf = functions.len();
    let mut values = vec![0.0; (grid_size + 1) * nf];
    for (j, (f, pf)) in functions.iter().zip(&means).enumerate() {
        let weights: Vec<f64> = sample.values().iter().map(|&x| f.eval(x) - pf).collect();
        let prefix = running_sums(&weights);
        let deleted = plan.map(|p| p.deleted_sums(&weights, &prefix));
        for g in 0..=grid_size {
            let mut s = prefix[prefix_len(n, g, grid_size)];
            if let Some(d) = &deleted {
                s -= d[g];
            }
            values[g * nf + j] = s / root_n;
        }
    }
    Ok(SequentialField { times: grid_times(grid_size), functions: functions.to_vec(), values })
}
