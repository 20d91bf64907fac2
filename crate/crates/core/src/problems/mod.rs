//! Benchmark problems: analytic test functions and interplanetary transfers.

mod analytic;
mod mga;
mod mga_dsm;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Arc, OnceLock};

use serde::Deserialize;

pub use analytic::{Paraboloid, Rastrigin, Schwefel, SCHWEFEL_MINIMIZER};
pub use mga::{InsertionOrbit, MgaBreakdown, MgaMission};
pub use mga_dsm::{DsmBreakdown, DsmDecision, DsmMission};

use crate::domain::SearchDomain;
use crate::error::{Error, Result};

/// Objective over physical coordinates. Failures are reported as a
/// non-finite value.
pub trait Objective: Send + Sync {
    fn evaluate(&self, x: &[f64]) -> f64;
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> Objective for F {
    fn evaluate(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Suggested optimizer settings for a problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tuning {
    pub n_pop: usize,
    /// Bubble half-width in unit coordinates.
    pub delta: f64,
    /// `None` means unlimited local restarts.
    pub iun_max: Option<usize>,
}

#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub domain: SearchDomain,
    pub objective: Arc<dyn Objective>,
    pub f_best: Option<f64>,
    pub x_best: Option<Vec<f64>>,
    pub tol_f: f64,
    /// Interior level thresholds for landscape analysis.
    pub level_edges: Option<Vec<f64>>,
    pub tuning: Tuning,
}

impl std::fmt::Debug for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim())
            .field("f_best", &self.f_best)
            .field("tol_f", &self.tol_f)
            .finish()
    }
}

impl Problem {
    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.evaluate(x)
    }

    /// Evaluates a unit-cube point; points outside the cube give NaN.
    pub fn evaluate_unit(&self, u: &[f64]) -> f64 {
        match self.domain.denormalize(u) {
            Ok(x) => self.objective.evaluate(&x),
            Err(_) => f64::NAN,
        }
    }

    pub fn require_f_best(&self) -> Result<f64> {
        self.f_best.ok_or_else(|| Error::MissingReference(self.name.clone()))
    }
}

pub const PROBLEM_NAMES: [&str; 7] = [
    "paraboloid",
    "rastrigin",
    "schwefel",
    "cassini1",
    "cassini2",
    "rosetta",
    "messenger",
];

pub const DEFAULT_ANALYTIC_DIM: usize = 5;

const BEST_KNOWN: &str = include_str!("../../data/best_known.toml");

#[derive(Debug, Clone, Deserialize)]
struct BestKnown {
    f_best: f64,
    tol_f: f64,
    n_pop: usize,
    delta: f64,
    iun_max: Option<usize>,
    x_best: Option<Vec<f64>>,
}

fn best_known(name: &str) -> &'static BestKnown {
    static TABLE: OnceLock<BTreeMap<String, BestKnown>> = OnceLock::new();
    let table = TABLE.get_or_init(|| toml::from_str(BEST_KNOWN).expect("bundled best-known table is valid"));
    &table[name]
}

fn analytic(name: &str, d: usize, lo: f64, hi: f64, objective: Arc<dyn Objective>, x_star: f64) -> Result<Problem> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(Problem {
        name: name.to_string(),
        domain: SearchDomain::cube(d, lo, hi)?,
        objective,
        f_best: Some(0.0),
        x_best: Some(vec![x_star; d]),
        tol_f: 1e-4,
        level_edges: None,
        tuning: Tuning {
            n_pop: if d <= 10 { 20 } else { 40 },
            delta: 0.2,
            iun_max: None,
        },
    })
}

fn trajectory(name: &str, lower: Vec<f64>, upper: Vec<f64>, objective: Arc<dyn Objective>) -> Result<Problem> {
    let bk = best_known(name);
    Ok(Problem {
        name: name.to_string(),
        domain: SearchDomain::new(lower, upper)?,
        objective,
        f_best: Some(bk.f_best),
        x_best: bk.x_best.clone(),
        tol_f: bk.tol_f,
        level_edges: None,
        tuning: Tuning {
            n_pop: bk.n_pop,
            delta: bk.delta,
            iun_max: bk.iun_max,
        },
    })
}

/// Looks a problem up by name. `dim` applies to the analytic functions only
/// (default 5).
pub fn by_name(name: &str, dim: Option<usize>) -> Result<Problem> {
    let key = name.to_ascii_lowercase();
    if dim.is_some() && !matches!(key.as_str(), "paraboloid" | "rastrigin" | "schwefel") {
        return Err(Error::InvalidParameter(format!(
            "problem `{name}` has a fixed dimension"
        )));
    }
    let d = dim.unwrap_or(DEFAULT_ANALYTIC_DIM);
    match key.as_str() {
        "paraboloid" => analytic("paraboloid", d, -5.0, 5.0, Arc::new(Paraboloid), 0.0),
        "rastrigin" => {
            let mut p = analytic("rastrigin", d, -5.12, 5.12, Arc::new(Rastrigin), 0.0)?;
            p.level_edges = Some(vec![1.5, 3.0, 5.0, 8.0, 12.0, 18.0, 27.0, 40.0]);
            Ok(p)
        }
        "schwefel" => analytic("schwefel", d, -500.0, 500.0, Arc::new(Schwefel), SCHWEFEL_MINIMIZER),
        "cassini1" => trajectory(
            "cassini1",
            vec![-1000.0, 30.0, 100.0, 30.0, 400.0, 1000.0],
            vec![0.0, 400.0, 470.0, 400.0, 2000.0, 6000.0],
            Arc::new(MgaMission::cassini1()),
        ),
        "cassini2" => {
            let mut lo = vec![-1000.0, 3.0, 0.0, 0.0, 100.0, 100.0, 30.0, 400.0, 800.0];
            let mut hi = vec![0.0, 5.0, 1.0, 1.0, 400.0, 500.0, 300.0, 1600.0, 2200.0];
            lo.extend([0.01; 5]);
            hi.extend([0.9; 5]);
            lo.extend([1.05, 1.05, 1.15, 1.7]);
            hi.extend([6.0, 6.0, 6.5, 291.0]);
            lo.extend([0.0; 4]);
            hi.extend([TAU; 4]);
            trajectory("cassini2", lo, hi, Arc::new(DsmMission::cassini2()))
        }
        "rosetta" => {
            let mut lo = vec![1460.0, 3.0, 0.0, 0.0, 300.0, 150.0, 150.0, 300.0, 700.0];
            let mut hi = vec![1825.0, 5.0, 1.0, 1.0, 500.0, 800.0, 800.0, 800.0, 1850.0];
            lo.extend([0.01; 5]);
            hi.extend([0.9; 5]);
            lo.extend([1.05; 4]);
            hi.extend([9.0; 4]);
            lo.extend([0.0, -PI, 0.0, 0.0]);
            hi.extend([TAU, PI, TAU, TAU]);
            trajectory("rosetta", lo, hi, Arc::new(DsmMission::rosetta()))
        }
        "messenger" => {
            let mut lo = vec![1000.0, 1.0, 0.0, 0.0, 200.0, 30.0, 30.0, 30.0];
            let mut hi = vec![4000.0, 5.0, 1.0, 1.0, 400.0, 400.0, 400.0, 400.0];
            lo.extend([0.01; 4]);
            hi.extend([0.99; 4]);
            lo.extend([1.1; 3]);
            hi.extend([6.0; 3]);
            lo.extend([-PI; 3]);
            hi.extend([PI; 3]);
            trajectory("messenger", lo, hi, Arc::new(DsmMission::messenger()))
        }
        _ => Err(Error::UnknownProblem(name.to_string())),
    }
}
