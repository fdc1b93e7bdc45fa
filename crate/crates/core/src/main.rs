use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use donsker::harness::{
    emit_report, run_experiment_with, soak, write_timings, ExperimentConfig, ExperimentResult,
    ReportFormat, RunOptions,
};

#[derive(Parser)]
#[command(name = "donsker", version, about = "Monte Carlo checks of invariance principles with deleted items")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Skip suites that would start after this many seconds.
    #[arg(long)]
    time_budget_secs: Option<u64>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions { workers: self.workers, time_budget: self.time_budget_secs.map(Duration::from_secs) }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment and write reports.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
    /// Run with the pinned seed and print one line per test.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Re-run with random seeds and compare failure counts with nominal levels.
    Soak {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: usize,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> donsker::Result<bool> {
    match cli.command {
        Command::Simulate { common, out } => {
            let config = ExperimentConfig::from_path(&common.config)?;
            let result = run_experiment_with(&config, &common.options())?;
            for format in [ReportFormat::Csv, ReportFormat::Json] {
                emit_report(&result, format, &out)?;
            }
            write_timings(&result, &out.join("timings.json"))?;
            print_lines(&result);
            println!("reports written to {}", out.display());
            Ok(result.all_expected_met())
        }
        Command::Verify { common } => {
            let config = ExperimentConfig::from_path(&common.config)?;
            let result = run_experiment_with(&config, &common.options())?;
            print_lines(&result);
            Ok(result.all_expected_met())
        }
        Command::Soak { common, runs } => {
            let config = ExperimentConfig::from_path(&common.config)?;
            let summary = soak(&config, runs, &common.options())?;
            println!("seeds: {:?}", summary.seeds);
            for l in &summary.lines {
                println!(
                    "{} {:<24} n={:<7} {:<26} unexpected {}/{} (allowed {}, alpha {:.2e})",
                    if l.ok { "OK  " } else { "BAD " },
                    l.suite.as_str(),
                    l.n,
                    l.test,
                    l.unexpected,
                    summary.runs,
                    l.allowed,
                    l.nominal_alpha
                );
            }
            Ok(summary.ok())
        }
    }
}

fn print_lines(result: &ExperimentResult) {
    for o in &result.outcomes {
        if o.tests.is_empty() {
            println!("SKIP {:<24} n={}", o.suite.as_str(), o.n);
        }
        for t in &o.tests {
            println!(
                "{} {:<24} n={:<7} k*={:<6} {:<26} stat {:<12.6} thr {:<10.6} got {} expected {}",
                if t.met_expectation() { "OK  " } else { "MISS" },
                o.suite.as_str(),
                o.n,
                o.k_star,
                t.name,
                t.statistic,
                t.threshold,
                t.verdict,
                t.expected
            );
        }
        for note in &o.notes {
            println!("     note: {note}");
        }
    }
    let verdict = if result.all_expected_met() { "ALL EXPECTED VERDICTS MET" } else { "SOME VERDICTS UNEXPECTED" };
    println!("{verdict}{}", if result.complete { "" } else { " (incomplete run)" });
}
