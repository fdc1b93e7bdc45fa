use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

use super::{run_experiment_with, ExperimentConfig, RunOptions, Suite};
use crate::error::{Error, Result};
use crate::stats::Verdict;

/// Upper quantile of the Binomial(R, α) count of unexpected verdicts.
const SOAK_QUANTILE: f64 = 0.999;

/// Unexpected-verdict count for one test across soak runs.
#[derive(Debug, Clone, Serialize)]
pub struct SoakLine {
    pub suite: Suite,
    pub n: usize,
    pub test: String,
    pub expected: Verdict,
    pub unexpected: usize,
    pub nominal_alpha: f64,
    /// Largest count compatible with `nominal_alpha` at the 0.999 quantile.
    pub allowed: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SoakSummary {
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub lines: Vec<SoakLine>,
}

impl SoakSummary {
    pub fn ok(&self) -> bool {
        self.lines.iter().all(|l| l.ok)
    }
}

/// Re-runs `config` with `runs` fresh random seeds.
pub fn soak(config: &ExperimentConfig, runs: usize, options: &RunOptions) -> Result<SoakSummary> {
    let seeds: Vec<u64> = (0..runs).map(|_| rand::random()).collect();
    soak_with_seeds(config, &seeds, options)
}

/// Counts, per test, the runs whose verdict differed from the expected one
/// and compares the count with a Binomial(R, nominal α) upper quantile.
///
/// For expected-fail negative controls the same bound applies to misses,
/// so they must reject essentially always.
pub fn soak_with_seeds(config: &ExperimentConfig, seeds: &[u64], options: &RunOptions) -> Result<SoakSummary> {
    if seeds.is_empty() {
        return Err(Error::config("soak needs at least one run"));
    }
    let mut lines: Vec<SoakLine> = Vec::new();
    for (run, &seed) in seeds.iter().enumerate() {
        let cfg = ExperimentConfig { seed, ..config.clone() };
        let result = run_experiment_with(&cfg, options)?;
        let tests = result.outcomes.iter().flat_map(|o| o.tests.iter().map(move |t| (o, t)));
        for (i, (o, t)) in tests.enumerate() {
            if run == 0 {
                lines.push(SoakLine {
                    suite: o.suite,
                    n: o.n,
                    test: t.name.clone(),
                    expected: t.expected,
                    unexpected: 0,
                    nominal_alpha: t.nominal_alpha,
                    allowed: 0,
                    ok: true,
                });
            }
            let line = lines
                .get_mut(i)
                .ok_or_else(|| Error::domain("soak runs produced different test lists"))?;
            if !t.met_expectation() {
                line.unexpected += 1;
            }
        }
    }
    for line in &mut lines {
        line.allowed = binomial_upper(seeds.len(), line.nominal_alpha)?;
        line.ok = line.unexpected <= line.allowed;
    }
    Ok(SoakSummary { runs: seeds.len(), seeds: seeds.to_vec(), lines })
}

fn binomial_upper(runs: usize, alpha: f64) -> Result<usize> {
    let dist = Binomial::new(alpha.clamp(0.0, 1.0), runs as u64)
        .map_err(|e| Error::domain(format!("binomial bound: {e}")))?;
    Ok((0..=runs).find(|&c| dist.cdf(c as u64) >= SOAK_QUANTILE).unwrap_or(runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_bound() {
        assert_eq!(binomial_upper(10, 0.0).unwrap(), 0);
        // P(X <= 1) for Binomial(10, 0.01) is 0.9957; P(X <= 2) is 0.99989.
        assert_eq!(binomial_upper(10, 0.01).unwrap(), 2);
        assert_eq!(binomial_upper(5, 1.0).unwrap(), 5);
    }
}
