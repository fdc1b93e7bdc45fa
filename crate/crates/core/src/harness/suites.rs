//! The seven named suites. Each one simulates `M` replications for a single
//! `n`, builds the processes it needs and turns them into [`TestReport`]s.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_2_PI, PI};

use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use super::config::{ExperimentConfig, Suite};
use crate::deletion::{
    make_overlapping_pair, make_plan, prefix_len, retention_probability, DeletionSchedule, Selection,
};
use crate::error::Result;
use crate::oracles::{bm_covariance, bridge_covariance, kiefer_muller_covariance, LimitLaw};
use crate::processes::{
    build_deleted_partial_sum, build_empirical, build_partial_sum, build_sequential_field,
    empirical_sup_exact, raw_deleted_sums, EmpiricalFlavor, Interpolation, TestFunction,
};
use crate::sampling::{draw_iid, SeededStream};
use crate::stats::{
    covariance_check, estimate_covariance, functional_expectation_check,
    increment_correlation_test, ks_one_sample_with, mean_check, two_sided_normal_alpha,
    Functional, ReplicationMatrix, TestReport, Verdict, Z_THRESHOLD,
};

/// Sample size, plan size and deletion count of the built-in overlap regime.
///
/// With `k = 50 > m` every prefix `J_m` keeps a single index, and nesting the
/// deleted sets forces that index to migrate; consecutive increments then
/// share a summand with opposite signs.
pub const OVERLAP_N: usize = 100;
pub const OVERLAP_K: usize = 50;
pub const OVERLAP_TIMES: [usize; 3] = [10, 11, 12];
/// `|ρ|√M` above this rejects independence for the overlap regime.
pub const OVERLAP_THRESHOLD: f64 = 5.0;

/// Grid used by the negative control; only the terminal value matters.
pub const NEGATIVE_CONTROL_GRID: usize = 10;

/// Number of points in each plot overlay.
const OVERLAY_POINTS: usize = 201;

/// Library pieces a suite ran; used to check that the suites jointly cover
/// every builder and every limit evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    PartialSum,
    DeletedPartialSum,
    RawDeletedSums,
    Empirical,
    SequentialField,
    NormalCdf,
    BmSupCdf,
    BmAbsSupCdf,
    KolmogorovCdf,
    BmCovariance,
    BridgeCovariance,
    KieferMullerCovariance,
}

impl Component {
    pub const ALL: [Component; 12] = [
        Component::PartialSum,
        Component::DeletedPartialSum,
        Component::RawDeletedSums,
        Component::Empirical,
        Component::SequentialField,
        Component::NormalCdf,
        Component::BmSupCdf,
        Component::BmAbsSupCdf,
        Component::KolmogorovCdf,
        Component::BmCovariance,
        Component::BridgeCovariance,
        Component::KieferMullerCovariance,
    ];

    fn of_law(law: &LimitLaw) -> Component {
        match law {
            LimitLaw::NormalMarginal { .. } | LimitLaw::BridgeMarginal { .. } => Component::NormalCdf,
            LimitLaw::BmSup => Component::BmSupCdf,
            LimitLaw::BmAbsSup => Component::BmAbsSupCdf,
            LimitLaw::BridgeSup => Component::KolmogorovCdf,
        }
    }
}

/// Empirical vs limiting distribution function at selected order statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfOverlay {
    pub name: String,
    /// `(x, empirical, oracle)` triples, `x` ascending.
    pub points: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteStatus {
    Complete,
    /// Not run because the time budget ran out.
    Skipped,
}

/// Everything one `(suite, n)` pair produced.
#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub suite: Suite,
    pub n: usize,
    pub k_star: usize,
    pub status: SuiteStatus,
    pub tests: Vec<TestReport>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub overlays: Vec<CdfOverlay>,
    #[serde(skip)]
    pub exercised: BTreeSet<Component>,
}

impl SuiteOutcome {
    fn new(suite: Suite, n: usize, k_star: usize) -> Self {
        SuiteOutcome {
            suite,
            n,
            k_star,
            status: SuiteStatus::Complete,
            tests: Vec::new(),
            notes: Vec::new(),
            overlays: Vec::new(),
            exercised: BTreeSet::new(),
        }
    }

    pub(crate) fn skipped(suite: Suite, n: usize, k_star: usize) -> Self {
        SuiteOutcome { status: SuiteStatus::Skipped, ..SuiteOutcome::new(suite, n, k_star) }
    }

    pub fn all_met(&self) -> bool {
        self.status == SuiteStatus::Complete && self.tests.iter().all(TestReport::met_expectation)
    }

    fn push(&mut self, name: &str, mut report: TestReport) {
        report.name = name.to_string();
        self.tests.push(report);
    }

    fn ks(&mut self, cx: &Ctx, name: &str, values: &[f64], law: LimitLaw, factor: f64) -> Result<()> {
        let mut report = ks_one_sample_with(values, |x| law.cdf(x), factor)?;
        report.context = format!("{} vs {}", report.context, law.label());
        self.overlays.push(overlay(format!("{}_n{}_{name}", cx.suite, cx.n), values, &law));
        self.exercised.insert(Component::of_law(&law));
        self.push(name, report);
        Ok(())
    }
}

fn overlay(name: String, values: &[f64], law: &LimitLaw) -> CdfOverlay {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let picks = OVERLAY_POINTS.min(m);
    let points = (0..picks)
        .map(|j| {
            let i = if picks == 1 { m - 1 } else { j * (m - 1) / (picks - 1) };
            let x = sorted[i];
            [x, (i + 1) as f64 / m as f64, law.cdf(x)]
        })
        .collect();
    CdfOverlay { name, points }
}

/// Per-`(suite, n)` execution context.
pub(crate) struct Ctx<'a> {
    pub config: &'a ExperimentConfig,
    pub pool: &'a ThreadPool,
    pub suite: Suite,
    pub n: usize,
}

impl Ctx<'_> {
    /// Substream for replication `r`; `purpose` separates draws within it.
    fn stream(&self, r: usize, purpose: &str) -> SeededStream {
        SeededStream::new(self.config.seed, r as u64).derive(fnv1a(&format!(
            "{}/{}/{purpose}",
            self.suite, self.n
        )))
    }

    /// Runs `f` for every replication on the pool, keeping replication order.
    fn replicate<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize) -> Result<T> + Sync + Send,
    {
        let m = self.config.replications;
        self.pool.install(|| (0..m).into_par_iter().map(&f).collect())
    }

    fn grid_index(&self, t: f64) -> usize {
        (t * self.config.grid_size as f64).round() as usize
    }

    fn grid_time(&self, g: usize) -> f64 {
        g as f64 / self.config.grid_size as f64
    }
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

pub(crate) fn k_star_reported(config: &ExperimentConfig, suite: Suite, n: usize) -> usize {
    match suite {
        Suite::DonskerComplete => 0,
        Suite::NegligibilityViolation => negative_control_schedule(n).k_star(n),
        _ => config.schedule.k_star(n),
    }
}

fn negative_control_schedule(n: usize) -> DeletionSchedule {
    DeletionSchedule::FixedK { k: n / 2 }
}

pub(crate) fn run_suite(cx: &Ctx) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new(cx.suite, cx.n, k_star_reported(cx.config, cx.suite, cx.n));
    match cx.suite {
        Suite::DonskerComplete => donsker_complete(cx, &mut out)?,
        Suite::DonskerDeleted => donsker_deleted(cx, &mut out)?,
        Suite::Polygonal => polygonal(cx, &mut out)?,
        Suite::EmpiricalBridge => empirical_bridge(cx, &mut out)?,
        Suite::SequentialKm => sequential_km(cx, &mut out)?,
        Suite::Lemma2Structure => lemma2_structure(cx, &mut out)?,
        Suite::NegligibilityViolation => negligibility_violation(cx, &mut out)?,
    }
    Ok(out)
}

/// Records the clamp warnings of a plan built like replication 0's.
fn plan_notes(cx: &Ctx, out: &mut SuiteOutcome, schedule: &DeletionSchedule, grid: usize) -> Result<()> {
    let probe = make_plan(schedule, cx.config.selection, cx.n, grid, cx.stream(0, "plan"))?;
    out.notes.extend(probe.warnings().iter().cloned());
    Ok(())
}

/// KS at `t = 1` and `t ≈ 1/2`, covariance at `(0.3, 0.7)` and `E W(1) = 0`.
///
/// The covariance target is the exact finite-`n` value for the plan law
/// (`schedule`, `interpolation`); the limit `s ∧ t` is reported alongside.
fn marginal_checks(
    cx: &Ctx,
    out: &mut SuiteOutcome,
    paths: &ReplicationMatrix,
    schedule: &DeletionSchedule,
    interpolation: Interpolation,
) -> Result<()> {
    let grid = cx.config.grid_size;
    let factor = cx.config.ks_factor;
    out.ks(cx, "ks_terminal", &paths.column(grid), LimitLaw::NormalMarginal { variance: 1.0 }, factor)?;
    let gh = cx.grid_index(0.5);
    let th = cx.grid_time(gh);
    out.ks(cx, "ks_half", &paths.column(gh), LimitLaw::NormalMarginal { variance: th }, factor)?;
    let (gs, gt) = (cx.grid_index(0.3), cx.grid_index(0.7));
    let (ts, tt) = (cx.grid_time(gs), cx.grid_time(gt));
    let limit = bm_covariance(ts, tt);
    out.exercised.insert(Component::BmCovariance);
    let target = path_covariance(schedule, cx.config.selection, cx.n, grid, gs, gt, interpolation);
    let est = paths.covariance(gs, gt)?;
    let mut report = covariance_check(est, target, paths.rows());
    report.context = format!("(s, t) = ({ts}, {tt}), limit s^t = {limit}; {}", report.context);
    out.push("covariance", report);
    let report = functional_expectation_check(paths, Functional::Terminal, 0.0, 0.0)?;
    out.push("terminal_mean", report);
    Ok(())
}

/// `Cov(path(t_gs), path(t_gt))` for `gs < gt` under plans from `make_plan`.
fn path_covariance(
    schedule: &DeletionSchedule,
    selection: Selection,
    n: usize,
    grid: usize,
    gs: usize,
    gt: usize,
    interpolation: Interpolation,
) -> f64 {
    let (ms, mt) = (prefix_len(n, gs, grid), prefix_len(n, gt, grid));
    let both: f64 = (1..=ms).map(|i| retention_probability(schedule, selection, n, i, ms, mt)).sum();
    let mut cov = both;
    if interpolation == Interpolation::Polygonal {
        let frac = |g: usize| ((n as u128 * g as u128) % grid as u128) as f64 / grid as f64;
        let (fs, ft) = (frac(gs), frac(gt));
        if ms == mt {
            cov += fs * ft;
        } else if fs > 0.0 {
            // ξ_{ms+1} enters the later sum if retained there.
            cov += fs * retention_probability(schedule, selection, n, ms + 1, mt, mt);
        }
    }
    cov / n as f64
}

/// Mean and law of full-resolution functionals.
fn sup_checks(
    cx: &Ctx,
    out: &mut SuiteOutcome,
    sups: &[f64],
    abs_sups: Option<&[f64]>,
    mean_abs: Option<&[f64]>,
) -> Result<()> {
    let allowance = cx.config.discretization_coef / (cx.n as f64).sqrt();
    let factor = cx.config.sup_ks_factor;
    out.push("sup_mean", mean_check(sups, FRAC_2_PI.sqrt(), allowance)?);
    out.ks(cx, "ks_sup", sups, LimitLaw::BmSup, factor)?;
    if let Some(abs_sups) = abs_sups {
        out.push("abs_sup_mean", mean_check(abs_sups, (PI / 2.0).sqrt(), allowance)?);
        out.ks(cx, "ks_abs_sup", abs_sups, LimitLaw::BmAbsSup, factor)?;
    }
    if let Some(mean_abs) = mean_abs {
        out.push("mean_abs_mean", mean_check(mean_abs, 2.0 / 3.0 * FRAC_2_PI.sqrt(), allowance)?);
    }
    Ok(())
}

fn donsker_complete(cx: &Ctx, out: &mut SuiteOutcome) -> Result<()> {
    let cfg = cx.config;
    let reps = cx.replicate(|r| {
        let sample = draw_iid(&cfg.distribution, cx.n, cx.stream(r, "sample"))?;
        let coarse = build_partial_sum(&sample, cfg.grid_size, Interpolation::Step)?;
        let fine = build_partial_sum(&sample, cx.n, Interpolation::Step)?;
        let f = [Functional::Sup, Functional::AbsSup, Functional::MeanAbs].map(|f| f.apply(&fine.values));
        Ok((coarse.values, f))
    })?;
    out.exercised.insert(Component::PartialSum);
    let paths = ReplicationMatrix::from_rows(cfg.grid_size + 1, reps.iter().map(|r| &r.0))?;
    marginal_checks(cx, out, &paths, &DeletionSchedule::None, Interpolation::Step)?;
    let column = |j: usize| reps.iter().map(|r| r.1[j]).collect::<Vec<f64>>();
    sup_checks(cx, out, &column(0), Some(&column(1)), Some(&column(2)))
}

fn donsker_deleted(cx: &Ctx, out: &mut SuiteOutcome) -> Result<()> {
    let cfg = cx.config;
    plan_notes(cx, out, &cfg.schedule, cfg.grid_size)?;
    let rows = cx.replicate(|r| {
        let sample = draw_iid(&cfg.distribution, cx.n, cx.stream(r, "sample"))?;
        let plan = make_plan(&cfg.schedule, cfg.selection, cx.n, cfg.grid_size, cx.stream(r, "plan"))?;
        Ok(build_deleted_partial_sum(&sample, &plan, Interpolation::Step)?.values)
    })?;
    out.exercised.insert(Component::DeletedPartialSum);
    let paths = ReplicationMatrix::from_rows(cfg.grid_size + 1, rows)?;
    marginal_checks(cx, out, &paths, &cfg.schedule, Interpolation::Step)
}

fn polygonal(cx: &Ctx, out: &mut SuiteOutcome) -> Result<()> {
    let cfg = cx.config;
    plan_notes(cx, out, &cfg.schedule, cfg.grid_size)?;
    // A fresh random set per time costs O(n k*) per path at full resolution;
    // the supremum uses one random set for all times instead.
    let fine_selection = match cfg.selection {
        Selection::RandomPerTime => Selection::StaticRandom,
        other => other,
    };
    out.notes.push(format!(
        "supremum taken over all n vertices (exact for the polygonal path), selection {fine_selection}"
    ));
    let reps = cx.replicate(|r| {
        let sample = draw_iid(&cfg.distribution, cx.n, cx.stream(r, "sample"))?;
        let plan = make_plan(&cfg.schedule, cfg.selection, cx.n, cfg.grid_size, cx.stream(r, "plan"))?;
        let coarse = build_deleted_partial_sum(&sample, &plan, Interpolation::Polygonal)?;
        let fine_plan = make_plan(&cfg.schedule, fine_selection, cx.n, cx.n, cx.stream(r, "fine_plan"))?;
        let fine = build_deleted_partial_sum(&sample, &fine_plan, Interpolation::Polygonal)?;
        Ok((coarse.values, Functional::Sup.apply(&fine.values)))
    })?;
    out.exercised.insert(Component::DeletedPartialSum);
    let paths = ReplicationMatrix::from_rows(cfg.grid_size + 1, reps.iter().map(|r| &r.0))?;
    marginal_checks(cx, out, &paths, &cfg.schedule, Interpolation::Polygonal)?;
    let sups: Vec<f64> = reps.iter().map(|r| r.1).collect();
    sup_checks(cx, out, &sups, None, None)
}

fn empirical_bridge(cx: &Ctx, out: &mut SuiteOutcome) -> Result<()> {
    let cfg = cx.config;
    let law = cfg.empirical_distribution;
    let p = cfg.bridge_points;
    let xs = (1..=p).map(|j| law.quantile(j as f64 / (p + 1) as f64)).collect::<Result<Vec<f64>>>()?;
    let probes = [law.quantile(0.3)?, law.quantile(0.5)?, law.quantile(0.7)?];
    plan_notes(cx, out, &cfg.schedule, 1)?;
    out.notes.push(format!("sup over {p} points x_j = F^-1(j/{})", p + 1));
    let reps = cx.replicate(|r| {
        let sample = draw_iid(&law, cx.n, cx.stream(r, "sample"))?;
        // Only the deleted set at t = 1 enters the empirical process.
        let plan = make_plan(&cfg.schedule, cfg.selection, cx.n, 1, cx.stream(r, "plan"))?;
        let grid = build_empirical(&sample, &law, &xs, EmpiricalFlavor::Scaled, Some(&plan))?;
        let at = build_empirical(&sample, &law, &probes, EmpiricalFlavor::Scaled, Some(&plan))?;
        let exact = empirical_sup_exact(&sample, &law, Some(&plan))?;
        Ok(([grid.sup_abs(), exact], [at.values[0], at.values[1], at.values[2]]))
    })?;
    out.exercised.insert(Component::Empirical);
    let sups = |j: usize| reps.iter().map(|r| r.0[j]).collect::<Vec<f64>>();
    out.ks(cx, "ks_sup", &sups(0), LimitLaw::BridgeSup, cfg.bridge_ks_factor)?;
    out.ks(cx, "ks_sup_continuum", &sups(1), LimitLaw::BridgeSup, cfg.bridge_ks_factor)?;
    let column = |j: usize| reps.iter().map(|r| r.1[j]).collect::<Vec<f64>>();
    let est = estimate_covariance(&column(0), &column(2))?;
    let mut report = covariance_check(est, bridge_covariance(probes[0], probes[2], &law), reps.len());
    report.context = format!("x = (F^-1(0.3), F^-1(0.7)); {}", report.context);
    out.exercised.insert(Component::BridgeCovariance);
    out.push("covariance", report);
    let half = LimitLaw::BridgeMarginal { p: law.cdf(probes[1]) };
    out.ks(cx, "ks_half", &column(1), half, cfg.ks_factor)
}

fn sequential_km(cx: &Ctx, out: &mut SuiteOutcome) -> Result<()> {
    let cfg = cx.config;
    let law = cfg.empirical_distribution;
    let grid = cfg.grid_size;
    let functions = [TestFunction::identity(), TestFunction::square()];
    let nf = functions.len();
    plan_notes(cx, out, &cfg.schedule, grid)?;
    let rows = cx.replicate(|r| {
        let sample = draw_iid(&law, cx.n, cx.stream(r, "sample"))?;
        let plan = make_plan(&cfg.schedule, cfg.selection, cx.n, grid, cx.stream(r, "plan"))?;
        Ok(build_sequential_field(&sample, &functions, grid, Some(&plan))?.values)
    })?;
    out.exercised.insert(Component::SequentialField);
    let field = ReplicationMatrix::from_rows((grid + 1) * nf, rows)?;
    let m = field.rows();
    let (f, g) = (&functions[0], &functions[1]);

    let gh = cx.grid_index(0.5);
    let th = cx.grid_time(gh);
    let est = field.covariance(gh * nf, grid * nf + 1)?;
    let target = kiefer_muller_covariance(th, 1.0, f, g, &law)?;
    let mut report = covariance_check(est, target, m);
    report.context = format!("Z({th}, {}) vs Z(1, {}); {}", f.name(), g.name(), report.context);
    out.push("km_covariance", report);

    let est = field.covariance(grid * nf, grid * nf)?;
    let target = kiefer_muller_covariance(1.0, 1.0, f, f, &law)?;
    out.push("km_variance", covariance_check(est, target, m));
    out.exercised.insert(Component::KieferMullerCovariance);

    let mut worst = (0.0_f64, 0, 0);
    for gi in 1..=grid {
        for j in 0..nf {
            let z = mean_check(&field.column(gi * nf + j), 0.0, 0.0)?.statistic;
            if z > worst.0 {
                worst = (z, gi, j);
            }
        }
    }
    let cells = grid * nf;
    let per_cell = two_sided_normal_alpha(Z_THRESHOLD);
    out.push(
        "zero_mean_max",
        TestReport::new(
            "",
            worst.0,
            Z_THRESHOLD,
            m,
            1.0 - (1.0 - per_cell).powi(cells as i32),
            format!(
                "max |mean|/se over {cells} (t, f) cells, attained at t = {}, f = {}",
                cx.grid_time(worst.1),
                functions[worst.2].name()
            ),
        ),
    );
    Ok(())
}

fn lemma2_structure(cx: &Ctx, out: &mut SuiteOutcome) -> Result<()> {
    let cfg = cx.config;
    let spec = cfg.distribution;

    // Independent increments of the complete path.
    let at = [0.25, 0.5, 0.75].map(|t| cx.grid_index(t));
    let rows = cx.replicate(|r| {
        let sample = draw_iid(&spec, cx.n, cx.stream(r, "sample"))?;
        let p = build_partial_sum(&sample, cfg.grid_size, Interpolation::Step)?;
        Ok(at.map(|g| p.values[g]))
    })?;
    out.exercised.insert(Component::PartialSum);
    let col = |rows: &[[f64; 3]], j: usize| rows.iter().map(|r| r[j]).collect::<Vec<f64>>();
    let mut report = increment_correlation_test(&col(&rows, 0), &col(&rows, 1), &col(&rows, 2), Z_THRESHOLD)?;
    report.context = format!("t = (0.25, 0.5, 0.75); {}", report.context);
    out.push("increments_complete", report);

    // Nested deleted sets couple consecutive increments.
    let schedule = DeletionSchedule::FixedK { k: OVERLAP_K };
    let rows = cx.replicate(|r| {
        let sample = draw_iid(&spec, OVERLAP_N, cx.stream(r, "overlap_sample"))?;
        let plan = make_overlapping_pair(&schedule, OVERLAP_N, OVERLAP_N, 1.0, cx.stream(r, "overlap_plan"))?;
        let p = raw_deleted_sums(&sample, &plan)?;
        Ok(OVERLAP_TIMES.map(|g| p.values[g]))
    })?;
    out.exercised.insert(Component::RawDeletedSums);
    let mut report =
        increment_correlation_test(&col(&rows, 0), &col(&rows, 1), &col(&rows, 2), OVERLAP_THRESHOLD)?;
    report.context = format!(
        "full overlap, n = {OVERLAP_N}, fixed_k k = {OVERLAP_K}, m = {:?}; {}",
        OVERLAP_TIMES, report.context
    );
    out.push("increments_full_overlap", report.expecting(Verdict::Fail));

    // Raw-sum variance at t = 1/2.
    let gh = cx.grid_index(0.5);
    let values = cx.replicate(|r| {
        let sample = draw_iid(&spec, cx.n, cx.stream(r, "variance_sample"))?;
        let plan = make_plan(&cfg.schedule, cfg.selection, cx.n, cfg.grid_size, cx.stream(r, "variance_plan"))?;
        Ok(raw_deleted_sums(&sample, &plan)?.values[gh])
    })?;
    let m_h = prefix_len(cx.n, gh, cfg.grid_size);
    let deleted = match cfg.selection {
        // |D ∩ J_m| is hypergeometric with mean k*(n) m / n.
        Selection::StaticRandom => cfg.schedule.k_star(cx.n) as f64 * m_h as f64 / cx.n as f64,
        _ => cfg.schedule.k_star(m_h) as f64,
    };
    let target = (m_h as f64 - deleted) * spec.variance();
    let est = estimate_covariance(&values, &values)?;
    let mut report = covariance_check(est, target, values.len());
    report.context = format!("m = {m_h}, expected deletions {deleted}; {}", report.context);
    out.push("raw_variance", report);
    Ok(())
}

fn negligibility_violation(cx: &Ctx, out: &mut SuiteOutcome) -> Result<()> {
    let cfg = cx.config;
    let schedule = negative_control_schedule(cx.n);
    let grid = NEGATIVE_CONTROL_GRID;
    let terminal = cx.replicate(|r| {
        let sample = draw_iid(&cfg.distribution, cx.n, cx.stream(r, "sample"))?;
        let plan = make_plan(&schedule, cfg.selection, cx.n, grid, cx.stream(r, "plan"))?;
        Ok(build_deleted_partial_sum(&sample, &plan, Interpolation::Step)?.terminal())
    })?;
    out.exercised.insert(Component::DeletedPartialSum);
    let k = schedule.k_star(cx.n);
    let target = (cx.n - k) as f64 / cx.n as f64;
    let est = estimate_covariance(&terminal, &terminal)?;
    let mut report = covariance_check(est, target, terminal.len());
    report.context = format!("k* = {k} = n/2; {}", report.context);
    out.push("terminal_variance", report);
    let law = LimitLaw::NormalMarginal { variance: 1.0 };
    out.ks(cx, "ks_terminal", &terminal, law, cfg.ks_factor)?;
    out.tests.last_mut().expect("just pushed").expected = Verdict::Fail;
    Ok(())
}
