use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{grid_times, running_sums};
use crate::deletion::{prefix_len, DeletionPlan};
use crate::error::{Error, Result};
use crate::sampling::SampleSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// `S_{⌊nt⌋}` only.
    Step,
    /// Adds `(nt - ⌊nt⌋) ξ_{⌊nt⌋+1}`.
    Polygonal,
}

/// A scalar path sampled on `t_g = g / grid_size`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathOnGrid {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub interpolation: Interpolation,
    /// Factor applied to the raw sums: `1/(σ√n)`, or 1 for raw sums.
    pub scale: f64,
}

impl PathOnGrid {
    pub fn grid_size(&self) -> usize {
        self.values.len() - 1
    }

    pub fn terminal(&self) -> f64 {
        *self.values.last().expect("paths have at least two points")
    }

    /// Writes `t,value` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "value"])?;
        for (t, v) in self.times.iter().zip(&self.values) {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `W_n(t) = S_{⌊nt⌋} / (σ√n)` or its polygonal version `X_n(t)`.
pub fn build_partial_sum(
    sample: &SampleSequence,
    grid_size: usize,
    interpolation: Interpolation,
) -> Result<PathOnGrid> {
    if grid_size == 0 {
        return Err(Error::domain("grid_size must be at least 1"));
    }
    let scale = donsker_scale(sample);
    Ok(assemble(sample.values(), grid_size, None, interpolation, scale))
}

/// `W̃_(n,k*)(t)`: the partial sum over `{1..⌊nt⌋} \ deleted(t)`, scaled by `1/(σ√n)`.
///
/// The polygonal version adds `(nt - ⌊nt⌋) ξ_{⌊nt⌋+1}` from the raw sequence,
/// whether or not that index is deleted at a later time.
pub fn build_deleted_partial_sum(
    sample: &SampleSequence,
    plan: &DeletionPlan,
    interpolation: Interpolation,
) -> Result<PathOnGrid> {
    check_plan(sample, plan)?;
    let prefix = running_sums(sample.values());
    let deleted = plan.deleted_sums(sample.values(), &prefix);
    let scale = donsker_scale(sample);
    Ok(assemble_with(sample.values(), &prefix, plan.grid_size(), Some(&deleted), interpolation, scale))
}

/// Unscaled step sums `S̃_(n,k*)(t_g)` (scale = 1).
pub fn raw_deleted_sums(sample: &SampleSequence, plan: &DeletionPlan) -> Result<PathOnGrid> {
    check_plan(sample, plan)?;
    let prefix = running_sums(sample.values());
    let deleted = plan.deleted_sums(sample.values(), &prefix);
    Ok(assemble_with(sample.values(), &prefix, plan.grid_size(), Some(&deleted), Interpolation::Step, 1.0))
}

fn check_plan(sample: &SampleSequence, plan: &DeletionPlan) -> Result<()> {
    if plan.n() != sample.len() {
        return Err(Error::domain(format!(
            "plan is for n = {}, sample has {} values",
            plan.n(),
            sample.len()
        )));
    }
    Ok(())
}

fn donsker_scale(sample: &SampleSequence) -> f64 {
    1.0 / (sample.spec().sigma() * (sample.len() as f64).sqrt())
}

fn assemble(
    values: &[f64],
    grid_size: usize,
    deleted: Option<&[f64]>,
    interpolation: Interpolation,
    scale: f64,
) -> PathOnGrid {
    let prefix = running_sums(values);
    assemble_with(values, &prefix, grid_size, deleted, interpolation, scale)
}

fn assemble_with(
    values: &[f64],
    prefix: &[f64],
    grid_size: usize,
    deleted: Option<&[f64]>,
    interpolation: Interpolation,
    scale: f64,
) -> PathOnGrid {
    let n = values.len();
    let path = (0..=grid_size)
        .map(|g| {
            let m = prefix_len(n, g, grid_size);
            let mut s = prefix[m];
            if let Some(d) = deleted {
                s -= d[g];
            }
            if interpolation == Interpolation::Polygonal {
                let rem = ((n as u128 * g as u128) % grid_size as u128) as f64;
                if rem > 0.0 {
                    s += rem / grid_size as f64 * values[m];
                }
            }
            s * scale
        })
        .collect();
    PathOnGrid { times: grid_times(grid_size), values: path, interpolation, scale }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deletion::{make_plan, DeletionSchedule, Selection};
    use crate::sampling::{draw_iid, DistributionKind, DistributionSpec, SeededStream};
    use approx::assert_abs_diff_eq;

    fn sample(values: &[f64]) -> SampleSequence {
        SampleSequence::new(values.to_vec(), DistributionSpec::standard(DistributionKind::Rademacher))
            .unwrap()
    }

    #[test]
    fn step_terminal_value() {
        let p = build_partial_sum(&sample(&[1.0, -1.0, 1.0, 1.0]), 4, Interpolation::Step).unwrap();
        assert_eq!(p.values[0], 0.0);
        assert_abs_diff_eq!(p.terminal(), 1.0, epsilon = 1e-15);
        assert_eq!(p.scale, 0.5);
    }

    #[test]
    fn polygonal_fractional_term() {
        // t = 3/8 with n = 4: nt = 1.5, value (ξ1 + 0.5 ξ2)/2.
        let p = build_partial_sum(&sample(&[1.0, -1.0, 1.0, 1.0]), 8, Interpolation::Polygonal)
            .unwrap();
        assert_abs_diff_eq!(p.values[3], 0.25, epsilon = 1e-15);
        let step = build_partial_sum(&sample(&[1.0, -1.0, 1.0, 1.0]), 8, Interpolation::Step).unwrap();
        assert_eq!(p.terminal(), step.terminal());
        for g in (0..=8).step_by(2) {
            assert_eq!(p.values[g], step.values[g]);
        }
    }

    #[test]
    fn deleting_one_index() {
        let s = sample(&[1.0, -1.0, 1.0, 1.0]);
        let plan = DeletionPlan::from_json(
            r#"{"n":4,"grid":1,"selection":"prefix","deleted":[[],[3]]}"#,
        )
        .unwrap();
        let p = build_deleted_partial_sum(&s, &plan, Interpolation::Step).unwrap();
        assert_abs_diff_eq!(p.terminal(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn empty_plan_is_bit_identical() {
        let spec = DistributionSpec::standard(DistributionKind::ExponentialCentered);
        let s = draw_iid(&spec, 97, SeededStream::new(3, 4)).unwrap();
        for interp in [Interpolation::Step, Interpolation::Polygonal] {
            for grid in [1, 7, 50, 97, 200] {
                let plan = make_plan(&DeletionSchedule::None, Selection::RandomPerTime, 97, grid, SeededStream::new(1, 1)).unwrap();
                let a = build_partial_sum(&s, grid, interp).unwrap();
                let b = build_deleted_partial_sum(&s, &plan, interp).unwrap();
                let bits = |p: &PathOnGrid| p.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&a), bits(&b));
            }
        }
    }

    #[test]
    fn size_mismatch_is_domain_error() {
        let plan = DeletionPlan::empty(5, 5).unwrap();
        let s = sample(&[1.0, 1.0]);
        assert!(matches!(
            build_deleted_partial_sum(&s, &plan, Interpolation::Step),
            Err(Error::Domain(_))
        ));
        assert!(build_partial_sum(&s, 0, Interpolation::Step).is_err());
    }

    #[test]
    fn csv_dump() {
        let p = build_partial_sum(&sample(&[1.0, -1.0]), 2, Interpolation::Step).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("t,value"));
        assert_eq!(text.lines().count(), 4);
    }
}
