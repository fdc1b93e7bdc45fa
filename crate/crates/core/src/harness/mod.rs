//! Config-driven experiment runner.
//!
//! [`run_experiment`] executes every requested suite for every `n` on a
//! worker pool, with one random substream per replication, and collects
//! the results in replication order. Reports are therefore bit-identical for
//! any number of workers.

mod config;
mod report;
mod soak;
mod suites;

use std::time::{Duration, Instant};

use serde::Serialize;

pub use config::{ExperimentConfig, Suite, MIN_GRID_SIZE, MIN_REPLICATIONS};
pub use report::{emit_report, write_timings, ReportFormat};
pub use soak::{soak, soak_with_seeds, SoakLine, SoakSummary};
pub use suites::{
    CdfOverlay, Component, SuiteOutcome, SuiteStatus, NEGATIVE_CONTROL_GRID, OVERLAP_K,
    OVERLAP_N, OVERLAP_THRESHOLD, OVERLAP_TIMES,
};

use crate::error::{Error, Result};
use crate::stats::TestReport;

/// Execution settings that must not influence the results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses all available cores.
    pub workers: Option<usize>,
    /// Suites not started before this much wall time has passed are skipped
    /// and the result is flagged incomplete.
    pub time_budget: Option<Duration>,
}

/// Wall time spent on one `(suite, n)` pair.
#[derive(Debug, Clone, Serialize)]
pub struct PhaseTiming {
    pub suite: Suite,
    pub n: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// One entry per `(n, suite)`, ordered by `n_list` then `suites`.
    pub outcomes: Vec<SuiteOutcome>,
    /// `false` if any suite was skipped.
    pub complete: bool,
    #[serde(skip)]
    pub timings: Vec<PhaseTiming>,
}

impl ExperimentResult {
    /// True iff the run is complete and every test met its expected verdict.
    pub fn all_expected_met(&self) -> bool {
        self.complete && self.outcomes.iter().all(SuiteOutcome::all_met)
    }

    pub fn outcome(&self, suite: Suite, n: usize) -> Option<&SuiteOutcome> {
        self.outcomes.iter().find(|o| o.suite == suite && o.n == n)
    }

    /// Looks up a test by suite, `n` and test name.
    pub fn test(&self, suite: Suite, n: usize, name: &str) -> Option<&TestReport> {
        self.outcome(suite, n)?.tests.iter().find(|t| t.name == name)
    }
}

/// Runs the experiment on all available cores.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    run_experiment_with(config, &RunOptions::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, options: &RunOptions) -> Result<ExperimentResult> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = options.workers {
        if w == 0 {
            return Err(Error::config("workers must be at least 1"));
        }
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::config(format!("thread pool: {e}")))?;

    let start = Instant::now();
    let mut outcomes = Vec::new();
    let mut timings = Vec::new();
    let mut complete = true;
    for &n in &config.n_list {
        for &suite in &config.suites {
            if options.time_budget.is_some_and(|b| start.elapsed() >= b) {
                complete = false;
                let k = suites::k_star_reported(config, suite, n);
                outcomes.push(SuiteOutcome::skipped(suite, n, k));
                continue;
            }
            let phase = Instant::now();
            let cx = suites::Ctx { config, pool: &pool, suite, n };
            outcomes.push(suites::run_suite(&cx)?);
            timings.push(PhaseTiming { suite, n, seconds: phase.elapsed().as_secs_f64() });
        }
    }
    Ok(ExperimentResult { config: config.clone(), outcomes, complete, timings })
}
