use serde::{Deserialize, Serialize};

use crate::deletion::DeletionPlan;
use crate::error::{Error, Result};
use crate::sampling::{DistributionSpec, SampleSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmpiricalFlavor {
    /// `(1/n) Σ 1{ξ_i <= x}` over retained indices.
    RawDf,
    /// `(1/n) Σ (1{ξ_i <= x} - F(x))` over retained indices.
    Centered,
    /// `√n` times the centered flavor.
    Scaled,
}

/// Empirical distribution path evaluated on sorted points `xs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPath {
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub flavor: EmpiricalFlavor,
    pub truth: DistributionSpec,
}

impl EmpiricalPath {
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// Builds `F_n`, `F_n - F`, `√n(F_n - F)` or their deleting-item versions.
///
/// With a plan, the retained set is `J_n \ deleted(grid_size)`, the deleted set
/// at `t = 1`. The normalizer stays `n` in every flavor.
pub fn build_empirical(
    sample: &SampleSequence,
    truth: &DistributionSpec,
    xs: &[f64],
    flavor: EmpiricalFlavor,
    plan: Option<&DeletionPlan>,
) -> Result<EmpiricalPath> {
    if xs.iter().any(|x| x.is_nan()) || xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("evaluation points must be sorted"));
    }
    let n = sample.len();
    let mut retained = vec![true; n];
    if let Some(plan) = plan {
        if plan.n() != n {
            return Err(Error::domain(format!(
                "plan is for n = {}, sample has {n} values",
                plan.n()
            )));
        }
        for i in plan.deleted(plan.grid_size()) {
            retained[i - 1] = false;
        }
    }
    // counts[j] = #{retained ξ : xs[j-1] < ξ <= xs[j]}
    let mut counts = vec![0usize; xs.len() + 1];
    let mut kept = 0usize;
    for (&v, _) in sample.values().iter().zip(&retained).filter(|(_, &r)| r) {
        counts[xs.partition_point(|&x| x < v)] += 1;
        kept += 1;
    }
    let nf = n as f64;
    let root_n = nf.sqrt();
    let mut cumulative = 0usize;
    let values = xs
        .iter()
        .zip(&counts)
        .map(|(&x, &c)| {
            cumulative += c;
            match flavor {
                EmpiricalFlavor::RawDf => cumulative as f64 / nf,
                EmpiricalFlavor::Centered => centered(cumulative, kept, truth.cdf(x), nf),
                EmpiricalFlavor::Scaled => root_n * centered(cumulative, kept, truth.cdf(x), nf),
            }
        })
        .collect();
    Ok(EmpiricalPath { xs: xs.to_vec(), values, flavor, truth: *truth })
}

/// `sup_x |G̃_n(x)|` over the whole line for the scaled flavor.
///
/// Between consecutive retained values the process is monotone in `F(x)`,
/// so the supremum is attained at a jump, from the left or the right.
pub fn empirical_sup_exact(
    sample: &SampleSequence,
    truth: &DistributionSpec,
    plan: Option<&DeletionPlan>,
) -> Result<f64> {
    let n = sample.len();
    let mut kept: Vec<f64> = match plan {
        None => sample.values().to_vec(),
        Some(plan) => {
            if plan.n() != n {
                return Err(Error::domain(format!(
                    "plan is for n = {}, sample has {n} values",
                    plan.n()
                )));
            }
            let deleted = plan.deleted(plan.grid_size());
            let mut d = deleted.iter().peekable();
            let mut out = Vec::with_capacity(n - deleted.len());
            for (idx, &v) in sample.values().iter().enumerate() {
                if d.peek() == Some(&&(idx + 1)) {
                    d.next();
                } else {
                    out.push(v);
                }
            }
            out
        }
    };
    kept.sort_by(f64::total_cmp);
    let k = kept.len() as f64;
    let mut sup = 0.0_f64;
    let mut i = 0;
    while i < kept.len() {
        // A run of ties jumps once.
        let mut j = i;
        while j < kept.len() && kept[j] == kept[i] {
            j += 1;
        }
        let fx = k * truth.cdf(kept[i]);
        sup = sup.max((i as f64 - fx).abs()).max((j as f64 - fx).abs());
        i = j;
    }
    Ok(sup / (n as f64).sqrt())
}

fn centered(count: usize, kept: usize, fx: f64, n: f64) -> f64 {
    (count as f64 - kept as f64 * fx) / n
}
