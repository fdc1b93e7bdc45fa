//! Python bindings for the `donsker` crate.
//!
//! Enum-valued parameters are plain strings on the Python side
//! (`"step"`, `"random_per_time"`, `"bm_sup"`, ...). Library errors map to
//! `ValueError` (bad configuration or domain) and `OSError` (I/O).

use std::time::Duration;

use donsker::deletion::{self, DeletionSchedule, Selection};
use donsker::harness::{self, ExperimentConfig, RunOptions};
use donsker::oracles::{self, LimitLaw};
use donsker::processes::{self, EmpiricalFlavor, Interpolation};
use donsker::sampling::{self, DistributionKind, DistributionSpec, SampleSequence, SeededStream};
use donsker::stats;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: donsker::Error) -> PyErr {
    match err {
        donsker::Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn value_err(msg: impl Into<String>) -> PyErr {
    PyValueError::new_err(msg.into())
}

/// A centered (or Uniform(0,1)) law from the sampling catalog.
#[pyclass(name = "Distribution", module = "donsker_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDistribution {
    spec: DistributionSpec,
}

#[pymethods]
impl PyDistribution {
    #[new]
    #[pyo3(signature = (kind, sigma = None))]
    fn new(kind: &str, sigma: Option<f64>) -> PyResult<Self> {
        let kind: DistributionKind = kind.parse().map_err(to_py)?;
        let spec = match sigma {
            Some(s) => DistributionSpec::new(kind, s).map_err(to_py)?,
            None => DistributionSpec::standard(kind),
        };
        Ok(PyDistribution { spec })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.spec.kind().as_str()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.spec.sigma()
    }

    #[getter]
    fn mean(&self) -> f64 {
        self.spec.mean()
    }

    #[getter]
    fn variance(&self) -> f64 {
        self.spec.variance()
    }

    fn cdf(&self, x: f64) -> f64 {
        self.spec.cdf(x)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        self.spec.quantile(p).map_err(to_py)
    }

    /// `n` i.i.d. draws from stream `(seed, stream)`.
    #[pyo3(signature = (n, seed, stream = 0))]
    fn draw(&self, n: usize, seed: u64, stream: u64) -> PyResult<Vec<f64>> {
        let s = sampling::draw_iid(&self.spec, n, SeededStream::new(seed, stream)).map_err(to_py)?;
        Ok(s.values().to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Distribution('{}', sigma={})", self.spec.kind(), self.spec.sigma())
    }
}

fn schedule_from(name: &str, k: Option<usize>, r: Option<f64>) -> PyResult<DeletionSchedule> {
    let s = match (name, k, r) {
        ("none", None, None) => DeletionSchedule::None,
        ("fixed_k", Some(k), None) => DeletionSchedule::FixedK { k },
        ("power_law", None, Some(r)) => DeletionSchedule::PowerLaw { r },
        ("fixed_k", _, _) => return Err(value_err("fixed_k takes k and no r")),
        ("power_law", _, _) => return Err(value_err("power_law takes r and no k")),
        ("none", _, _) => return Err(value_err("schedule 'none' takes neither k nor r")),
        (other, _, _) => return Err(value_err(format!("unknown schedule '{other}'"))),
    };
    s.validate().map_err(to_py)?;
    Ok(s)
}

/// Deleted index sets for every grid time.
#[pyclass(name = "DeletionPlan", module = "donsker_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDeletionPlan {
    plan: deletion::DeletionPlan,
}

#[pymethods]
impl PyDeletionPlan {
    #[new]
    #[pyo3(signature = (n, grid_size, schedule = "power_law", selection = "random_per_time", seed = 0, stream = 0, k = None, r = None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n: usize,
        grid_size: usize,
        schedule: &str,
        selection: &str,
        seed: u64,
        stream: u64,
        k: Option<usize>,
        r: Option<f64>,
    ) -> PyResult<Self> {
        let r = if schedule == "power_law" && r.is_none() && k.is_none() { Some(0.5) } else { r };
        let schedule = schedule_from(schedule, k, r)?;
        let selection: Selection = selection.parse().map_err(to_py)?;
        let plan = deletion::make_plan(&schedule, selection, n, grid_size, SeededStream::new(seed, stream))
            .map_err(to_py)?;
        Ok(PyDeletionPlan { plan })
    }

    /// The plan that deletes nothing.
    #[staticmethod]
    fn empty(n: usize, grid_size: usize) -> PyResult<Self> {
        Ok(PyDeletionPlan { plan: deletion::DeletionPlan::empty(n, grid_size).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyDeletionPlan { plan: deletion::DeletionPlan::from_json(text).map_err(to_py)? })
    }

    fn to_json(&self) -> PyResult<String> {
        self.plan.to_json().map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.plan.n()
    }

    #[getter]
    fn grid_size(&self) -> usize {
        self.plan.grid_size()
    }

    #[getter]
    fn selection(&self) -> &'static str {
        self.plan.selection().as_str()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.plan.warnings().to_vec()
    }

    /// Prefix length `floor(n g / grid_size)`.
    fn m(&self, g: usize) -> PyResult<usize> {
        self.check(g)?;
        Ok(self.plan.m(g))
    }

    /// Sorted 1-based indices deleted at grid time `g`.
    fn deleted(&self, g: usize) -> PyResult<Vec<usize>> {
        self.check(g)?;
        Ok(self.plan.deleted(g))
    }

    fn __repr__(&self) -> String {
        format!(
            "DeletionPlan(n={}, grid_size={}, selection='{}')",
            self.plan.n(),
            self.plan.grid_size(),
            self.plan.selection()
        )
    }
}

impl PyDeletionPlan {
    fn check(&self, g: usize) -> PyResult<()> {
        if g > self.plan.grid_size() {
            return Err(value_err(format!("grid index {g} exceeds {}", self.plan.grid_size())));
        }
        Ok(())
    }
}

fn sample_of(values: Vec<f64>, dist: &PyDistribution) -> PyResult<SampleSequence> {
    SampleSequence::new(values, dist.spec).map_err(to_py)
}

fn interpolation(name: &str) -> PyResult<Interpolation> {
    match name {
        "step" => Ok(Interpolation::Step),
        "polygonal" => Ok(Interpolation::Polygonal),
        other => Err(value_err(format!("unknown interpolation '{other}' (step | polygonal)"))),
    }
}

/// Normalized partial-sum path on `t = g / grid_size`, optionally with deletions.
#[pyfunction]
#[pyo3(signature = (values, distribution, grid_size, interpolation = "step", plan = None))]
fn partial_sum(
    values: Vec<f64>,
    distribution: &PyDistribution,
    grid_size: usize,
    interpolation: &str,
    plan: Option<&PyDeletionPlan>,
) -> PyResult<Vec<f64>> {
    let sample = sample_of(values, distribution)?;
    let interp = self::interpolation(interpolation)?;
    let path = match plan {
        None => processes::build_partial_sum(&sample, grid_size, interp),
        Some(p) => {
            if p.plan.grid_size() != grid_size {
                return Err(value_err("plan grid_size differs from grid_size"));
            }
            processes::build_deleted_partial_sum(&sample, &p.plan, interp)
        }
    }
    .map_err(to_py)?;
    Ok(path.values)
}

/// Un-normalized deleted sums on the plan's grid.
#[pyfunction]
fn raw_deleted_sums(values: Vec<f64>, distribution: &PyDistribution, plan: &PyDeletionPlan) -> PyResult<Vec<f64>> {
    let sample = sample_of(values, distribution)?;
    Ok(processes::raw_deleted_sums(&sample, &plan.plan).map_err(to_py)?.values)
}

/// Empirical process at sorted points `xs`.
#[pyfunction]
#[pyo3(signature = (values, truth, xs, flavor = "scaled", plan = None))]
fn empirical(
    values: Vec<f64>,
    truth: &PyDistribution,
    xs: Vec<f64>,
    flavor: &str,
    plan: Option<&PyDeletionPlan>,
) -> PyResult<Vec<f64>> {
    let flavor = match flavor {
        "raw_df" => EmpiricalFlavor::RawDf,
        "centered" => EmpiricalFlavor::Centered,
        "scaled" => EmpiricalFlavor::Scaled,
        other => return Err(value_err(format!("unknown flavor '{other}' (raw_df | centered | scaled)"))),
    };
    let sample = sample_of(values, truth)?;
    let path = processes::build_empirical(&sample, &truth.spec, &xs, flavor, plan.map(|p| &p.plan))
        .map_err(to_py)?;
    Ok(path.values)
}

/// Supremum of the scaled empirical process over the whole real line.
#[pyfunction]
#[pyo3(signature = (values, truth, plan = None))]
fn empirical_sup(values: Vec<f64>, truth: &PyDistribution, plan: Option<&PyDeletionPlan>) -> PyResult<f64> {
    let sample = sample_of(values, truth)?;
    processes::empirical_sup_exact(&sample, &truth.spec, plan.map(|p| &p.plan)).map_err(to_py)
}

#[pyfunction]
fn normal_cdf(x: f64) -> f64 {
    oracles::normal_cdf(x)
}

#[pyfunction]
fn bm_sup_cdf(x: f64) -> f64 {
    oracles::bm_sup_cdf(x)
}

#[pyfunction]
fn bm_abs_sup_cdf(x: f64) -> f64 {
    oracles::bm_abs_sup_cdf(x)
}

#[pyfunction]
fn kolmogorov_cdf(x: f64) -> f64 {
    oracles::kolmogorov_cdf(x)
}

#[pyfunction]
fn bm_covariance(s: f64, t: f64) -> f64 {
    oracles::bm_covariance(s, t)
}

#[pyfunction]
fn bridge_covariance(s: f64, t: f64, truth: &PyDistribution) -> f64 {
    oracles::bridge_covariance(s, t, &truth.spec)
}

fn limit_law(name: &str, param: Option<f64>) -> PyResult<LimitLaw> {
    Ok(match name {
        "normal" => LimitLaw::NormalMarginal { variance: param.unwrap_or(1.0) },
        "bm_sup" => LimitLaw::BmSup,
        "bm_abs_sup" => LimitLaw::BmAbsSup,
        "kolmogorov" => LimitLaw::BridgeSup,
        "bridge_marginal" => LimitLaw::BridgeMarginal {
            p: param.ok_or_else(|| value_err("bridge_marginal needs param = p"))?,
        },
        other => {
            return Err(value_err(format!(
                "unknown law '{other}' (normal | bm_sup | bm_abs_sup | kolmogorov | bridge_marginal)"
            )))
        }
    })
}

/// One-sample KS test of `values` against a named limit law.
///
/// Returns a dict with `statistic`, `threshold` (`factor / sqrt(len)`) and `verdict`.
#[pyfunction]
#[pyo3(signature = (values, law = "normal", param = None, factor = 1.63))]
fn ks_test<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    law: &str,
    param: Option<f64>,
    factor: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let law = limit_law(law, param)?;
    let report = stats::ks_one_sample_with(&values, |x| law.cdf(x), factor).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("statistic", report.statistic)?;
    out.set_item("threshold", report.threshold)?;
    out.set_item("verdict", report.verdict.to_string())?;
    Ok(out)
}

/// Validate and run an experiment described by a TOML string; returns the
/// result as a JSON string.
#[pyfunction]
#[pyo3(signature = (config_toml, workers = None, time_budget_secs = None))]
fn run_experiment(
    py: Python<'_>,
    config_toml: &str,
    workers: Option<usize>,
    time_budget_secs: Option<f64>,
) -> PyResult<String> {
    let config = ExperimentConfig::from_toml_str(config_toml).map_err(to_py)?;
    let time_budget = match time_budget_secs {
        Some(s) if s.is_finite() && s >= 0.0 => Some(Duration::from_secs_f64(s)),
        Some(_) => return Err(value_err("time_budget_secs must be finite and non-negative")),
        None => None,
    };
    let options = RunOptions { workers, time_budget };
    let result = py.detach(|| harness::run_experiment_with(&config, &options)).map_err(to_py)?;
    serde_json::to_string(&result).map_err(|e| value_err(e.to_string()))
}

#[pymodule]
pub fn donsker_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDistribution>()?;
    m.add_class::<PyDeletionPlan>()?;
    m.add_function(wrap_pyfunction!(partial_sum, m)?)?;
    m.add_function(wrap_pyfunction!(raw_deleted_sums, m)?)?;
    m.add_function(wrap_pyfunction!(empirical, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_sup, m)?)?;
    m.add_function(wrap_pyfunction!(normal_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(bm_sup_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(bm_abs_sup_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(kolmogorov_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(bm_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(bridge_covariance, m)?)?;
    m.add_function(wrap_pyfunction!(ks_test, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
