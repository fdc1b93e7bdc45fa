use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde_json::json;

use super::suites::SuiteStatus;
use super::ExperimentResult;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl ReportFormat {
    fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Csv => "report.csv",
            ReportFormat::Json => "report.json",
        }
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::config(format!("unknown report format `{other}`"))),
        }
    }
}

pub const CSV_HEADER: [&str; 8] =
    ["suite", "n", "k_star", "statistic", "threshold", "verdict", "test", "expected"];

/// Writes `report.csv` or `report.json` into `out_dir`, plus one
/// `plots/<suite>_n<n>_<test>.csv` overlay (`x,empirical,oracle`) per KS test.
///
/// Returns the paths written. Output depends only on `result` and excludes
/// wall times, so re-emitting gives byte-identical files.
pub fn emit_report(result: &ExperimentResult, format: ReportFormat, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let main = out_dir.join(format.file_name());
    match format {
        ReportFormat::Csv => fs::write(&main, report_csv(result)?)?,
        ReportFormat::Json => fs::write(&main, report_json(result)?)?,
    }
    let mut written = vec![main];
    let plots = out_dir.join("plots");
    fs::create_dir_all(&plots)?;
    for outcome in &result.outcomes {
        for overlay in &outcome.overlays {
            let path = plots.join(format!("{}.csv", overlay.name));
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "empirical", "oracle"])?;
            for p in &overlay.points {
                w.write_record(p.map(|v| v.to_string()))?;
            }
            fs::write(&path, into_bytes(w)?)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes per-phase wall times; kept apart from the reports, which are
/// deterministic.
pub fn write_timings(result: &ExperimentResult, path: &Path) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(&result.timings)?)?;
    Ok(())
}

fn report_csv(result: &ExperimentResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for o in &result.outcomes {
        let (suite, n, k) = (o.suite.to_string(), o.n.to_string(), o.k_star.to_string());
        if o.status == SuiteStatus::Skipped {
            w.write_record([&suite, &n, &k, "", "", "skipped", "", ""])?;
            continue;
        }
        for t in &o.tests {
            w.write_record([
                suite.clone(),
                n.clone(),
                k.clone(),
                t.statistic.to_string(),
                t.threshold.to_string(),
                t.verdict.to_string(),
                t.name.clone(),
                t.expected.to_string(),
            ])?;
        }
    }
    into_bytes(w)
}

fn report_json(result: &ExperimentResult) -> Result<String> {
    let suites: Vec<_> = result
        .outcomes
        .iter()
        .map(|o| {
            json!({
                "suite": o.suite,
                "n": o.n,
                "k_star": o.k_star,
                "status": o.status,
                "summary": {
                    "tests": o.tests.len(),
                    "met_expected": o.tests.iter().filter(|t| t.met_expectation()).count(),
                    "all_met": o.all_met(),
                },
                "tests": o.tests,
                "notes": o.notes,
            })
        })
        .collect();
    let doc = json!({
        "name": result.config.name,
        "config": result.config,
        "complete": result.complete,
        "all_expected_met": result.all_expected_met(),
        "suites": suites,
    });
    let mut text = serde_json::to_string_pretty(&doc)?;
    text.push('\n');
    Ok(text)
}

fn into_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}
