//! Python bindings: problems, optimizer runs, benchmarks, landscape analysis
//! and the astrodynamics helpers.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use idea_core::astro::{self, Direction, Vec3};
use idea_core::error::Error;
use idea_core::harness::{self, Reference};
use idea_core::landscape;
use idea_core::local::{MinimumRecord, Origin};
use idea_core::{params, problems};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::UnknownProblem(_)
        | Error::UnknownAlgorithm(_)
        | Error::InvalidParameter(_)
        | Error::InvalidDomain(_)
        | Error::Parse(_)
        | Error::OutOfBounds { .. }
        | Error::BudgetTooSmall { .. }
        | Error::PopulationTooSmall { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// A benchmark problem addressed by name.
#[pyclass(frozen, module = "idea_py")]
struct Problem {
    inner: problems::Problem,
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (name, dim=None))]
    fn new(name: &str, dim: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: problems::by_name(name, dim).map_err(py_err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn lower(&self) -> Vec<f64> {
        self.inner.domain.lower().to_vec()
    }

    #[getter]
    fn upper(&self) -> Vec<f64> {
        self.inner.domain.upper().to_vec()
    }

    #[getter]
    fn f_best(&self) -> Option<f64> {
        self.inner.f_best
    }

    #[getter]
    fn x_best(&self) -> Option<Vec<f64>> {
        self.inner.x_best.clone()
    }

    #[getter]
    fn tol_f(&self) -> f64 {
        self.inner.tol_f
    }

    /// Objective at a point in physical units (NaN where undefined).
    fn evaluate(&self, x: Vec<f64>) -> PyResult<f64> {
        if x.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} components",
                self.inner.dim()
            )));
        }
        Ok(self.inner.evaluate(&x))
    }

    /// Objective at a point of the unit cube.
    fn evaluate_unit(&self, u: Vec<f64>) -> PyResult<f64> {
        if u.len() != self.inner.dim() || u.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(PyValueError::new_err("point must lie in the unit cube"));
        }
        Ok(self.inner.evaluate_unit(&u))
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}', dim={})", self.inner.name, self.inner.dim())
    }
}

/// Outcome of one optimizer run.
#[pyclass(frozen, module = "idea_py")]
struct RunResult {
    report: idea_core::report::RunReport,
    archive: Vec<MinimumRecord>,
}

#[pymethods]
impl RunResult {
    #[getter]
    fn algorithm(&self) -> String {
        self.report.algorithm.clone()
    }

    #[getter]
    fn best_f(&self) -> f64 {
        self.report.best_f
    }

    /// Best point in physical units.
    #[getter]
    fn best_x(&self) -> Vec<f64> {
        self.report.best_x.clone()
    }

    #[getter]
    fn evaluations(&self) -> usize {
        self.report.evaluations
    }

    #[getter]
    fn local_searches(&self) -> usize {
        self.report.local_searches
    }

    /// `(evaluations, best_f)` at every improvement.
    #[getter]
    fn trace(&self) -> Vec<(usize, f64)> {
        self.report.trace.iter().map(|p| (p.evaluations, p.best_f)).collect()
    }

    /// Archived local minima as `(x_unit, f)` pairs.
    #[getter]
    fn minima(&self) -> Vec<(Vec<f64>, f64)> {
        self.archive.iter().map(|r| (r.x.clone(), r.f)).collect()
    }

    /// The report as a JSON string.
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

/// One run of `algo` (idea, de, mbh, mbh-gr); `params` is optional TOML text.
#[pyfunction]
#[pyo3(signature = (problem, algo="idea", budget=10000, seed=0, run=0, params=None))]
fn optimize(
    py: Python<'_>,
    problem: &Problem,
    algo: &str,
    budget: usize,
    seed: u64,
    run: u64,
    params: Option<&str>,
) -> PyResult<RunResult> {
    let a = params::resolve(algo, &problem.inner, params).map_err(py_err)?;
    let p = &problem.inner;
    let out = py.detach(|| a.run(p, budget, seed, run)).map_err(py_err)?;
    Ok(RunResult {
        report: out.report,
        archive: out.archive.records,
    })
}

/// Success-rate table as CSV; `reference` is "best-known", "best-found" or a number.
#[pyfunction]
#[pyo3(signature = (problem, algos, budgets, runs=20, seed=0, reference="best-known"))]
fn benchmark(
    py: Python<'_>,
    problem: &Problem,
    algos: Vec<String>,
    budgets: Vec<usize>,
    runs: usize,
    seed: u64,
    reference: &str,
) -> PyResult<String> {
    let reference = match reference {
        "best-known" => Reference::BestKnown,
        "best-found" => Reference::BestFound,
        v => Reference::Value(
            v.parse()
                .map_err(|_| PyValueError::new_err(format!("bad reference `{v}`")))?,
        ),
    };
    let algorithms = algos
        .iter()
        .map(|n| harness::Algorithm::by_name(n, &problem.inner))
        .collect::<Result<Vec<_>, _>>()
        .map_err(py_err)?;
    let p = &problem.inner;
    let mut e = py
        .detach(|| harness::experiment(&algorithms, p, &budgets, runs, seed, reference))
        .map_err(py_err)?;
    for s in &mut e.stats {
        s.wall_seconds = None;
    }
    Ok(harness::stats_csv(&e.stats))
}

#[pyfunction]
#[pyo3(signature = (d_err, alpha=0.05))]
fn required_sample_size(d_err: f64, alpha: f64) -> PyResult<usize> {
    harness::required_sample_size(d_err, alpha).map_err(py_err)
}

/// `(p_step, p_after_k_h)` for total collapse of a DE population.
#[pyfunction]
fn collapse_probability(n_pop: usize, crossover: f64, d: usize, k_h: u32) -> PyResult<(f64, f64)> {
    if n_pop < 2 || d < 1 {
        return Err(PyValueError::new_err("needs n_pop >= 2 and d >= 1"));
    }
    Ok(idea_core::de::collapse_probability(n_pop, crossover, d, k_h))
}

fn vec3(v: [f64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

/// Terminal velocities (km/s) of the transfer from `r1` to `r2` (km) in
/// `tof` seconds.
#[pyfunction]
#[pyo3(signature = (r1, r2, tof, mu=astro::MU_SUN, prograde=true))]
fn lambert(r1: [f64; 3], r2: [f64; 3], tof: f64, mu: f64, prograde: bool) -> PyResult<([f64; 3], [f64; 3])> {
    let dir = if prograde {
        Direction::Prograde
    } else {
        Direction::Retrograde
    };
    let (v1, v2) = astro::lambert(&vec3(r1), &vec3(r2), tof, mu, dir).map_err(|e| py_err(e.into()))?;
    Ok(([v1.x, v1.y, v1.z], [v2.x, v2.y, v2.z]))
}

/// Per-minimum `(level, d_il, d_tl)` for minima given in unit coordinates.
#[pyfunction]
#[pyo3(signature = (points, values, best_known, edges=None))]
fn level_distances(
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    best_known: Vec<f64>,
    edges: Option<Vec<f64>>,
) -> PyResult<Vec<(usize, Option<f64>, f64)>> {
    if points.len() != values.len() {
        return Err(PyValueError::new_err("points and values differ in length"));
    }
    let records: Vec<MinimumRecord> = points
        .into_iter()
        .zip(values)
        .map(|(x, f)| MinimumRecord {
            x,
            f,
            evaluations_used: 0,
            origin: Origin::Harvest,
            stamp: 0,
            degenerate: false,
        })
        .collect();
    let edges = edges.unwrap_or_else(|| landscape::equal_width_edges(&records, 8));
    let partition = landscape::assign_levels(&records, &edges).map_err(py_err)?;
    let rows = landscape::level_distances(&partition, &best_known).map_err(py_err)?;
    Ok(rows.into_iter().map(|r| (r.level, r.d_il, r.d_tl)).collect())
}

#[pymodule]
fn idea_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(optimize, m)?)?;
    m.add_function(wrap_pyfunction!(benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(required_sample_size, m)?)?;
    m.add_function(wrap_pyfunction!(collapse_probability, m)?)?;
    m.add_function(wrap_pyfunction!(lambert, m)?)?;
    m.add_function(wrap_pyfunction!(level_distances, m)?)?;
    m.add("PROBLEM_NAMES", problems::PROBLEM_NAMES.to_vec())?;
    m.add("ALGORITHM_NAMES", harness::ALGORITHM_NAMES.to_vec())?;
    Ok(())
}
