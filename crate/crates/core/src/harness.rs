//! Repeated-run testing: success counting, binomial sample sizing and
//! success-rate curves over increasing budgets.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::de::DeParams;
use crate::error::{Error, Result};
use crate::idea::{run_de, run_idea, IdeaParams, RunOutput};
use crate::mbh::{run_mbh, MbhParams};
use crate::problems::Problem;
use crate::rng;

/// An optimizer with its settings.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Idea(IdeaParams),
    De { params: DeParams, n_pop: usize },
    Mbh(MbhParams),
}

pub const ALGORITHM_NAMES: [&str; 4] = ["idea", "de", "mbh", "mbh-gr"];

impl Algorithm {
    /// Default settings for `name` on `problem`.
    ///
    /// The DE baseline is DE/best/1/bin with `F = 0.75`, `C_R = 0.8` and
    /// `5 d` agents.
    pub fn by_name(name: &str, problem: &Problem) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "idea" => Ok(Algorithm::Idea(IdeaParams::for_problem(problem))),
            "de" => Ok(Algorithm::De {
                params: DeParams::best_1_bin(0.75, 0.8),
                n_pop: 5 * problem.dim(),
            }),
            "mbh" => Ok(Algorithm::Mbh(MbhParams::default())),
            "mbh-gr" => Ok(Algorithm::Mbh(MbhParams::with_restart())),
            _ => Err(Error::UnknownAlgorithm(name.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Idea(_) => "idea",
            Algorithm::De { .. } => "de",
            Algorithm::Mbh(p) if p.n_samples.is_some() => "mbh-gr",
            Algorithm::Mbh(_) => "mbh",
        }
    }

    /// One run on child stream `run` of `seed`.
    pub fn run(&self, problem: &Problem, budget: usize, seed: u64, run: u64) -> Result<RunOutput> {
        let mut r = rng::child(seed, run);
        let mut out = match self {
            Algorithm::Idea(p) => run_idea(problem, p, budget, &mut r)?,
            Algorithm::De { params, n_pop } => run_de(problem, params, *n_pop, budget, &mut r)?,
            Algorithm::Mbh(p) => run_mbh(problem, p, budget, &mut r)?,
        };
        out.report.seed = seed;
        out.report.run = run;
        Ok(out)
    }
}

/// `n` independent runs in parallel; run `i` uses child stream `i` of `seed`.
pub fn run_batch(
    algorithm: &Algorithm,
    problem: &Problem,
    n: usize,
    budget: usize,
    seed: u64,
) -> Result<Vec<RunOutput>> {
    if n == 0 {
        return Err(Error::InvalidParameter("at least one run is needed".into()));
    }
    (0..n as u64)
        .into_par_iter()
        .map(|i| algorithm.run(problem, budget, seed, i))
        .collect()
}

/// Value the success test compares against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// The problem's best-known value.
    BestKnown,
    /// The best value reached by any run of the same experiment.
    BestFound,
    Value(f64),
}

impl Reference {
    /// Reference value; `found` is the best value of the experiment's runs.
    pub fn resolve(self, problem: &Problem, found: f64) -> Result<f64> {
        match self {
            Reference::BestKnown => problem.require_f_best(),
            Reference::BestFound if found.is_finite() => Ok(found),
            Reference::BestFound => Err(Error::InvalidParameter("no run reached a finite value".into())),
            Reference::Value(v) => Ok(v),
        }
    }
}

/// Success iff `|f_ref − f| < tol_f`.
pub fn is_success(f: f64, f_ref: f64, tol_f: f64) -> bool {
    (f_ref - f).abs() < tol_f
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessStats {
    pub algorithm: String,
    pub problem: String,
    pub seed: u64,
    /// Evaluation budget `N`.
    pub budget: usize,
    /// Number of runs `n`.
    pub runs: usize,
    pub successes: usize,
    pub p_s: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub wall_seconds: Option<f64>,
}

pub const CSV_HEADER: &str = "algorithm,problem,seed,N,n,j_s,p_s,ci_low,ci_high,wall_seconds";

impl SuccessStats {
    pub fn csv_row(&self) -> String {
        let wall = self.wall_seconds.map(|w| format!("{w:.3}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            self.algorithm,
            self.problem,
            self.seed,
            self.budget,
            self.runs,
            self.successes,
            self.p_s,
            self.ci_low,
            self.ci_high,
            wall
        )
    }
}

pub fn stats_csv(rows: &[SuccessStats]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

/// Two-sided Wilson score interval for `j` successes in `n` trials at
/// confidence `1 − alpha`.
pub fn wilson_interval(j: usize, n: usize, alpha: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let (nf, p) = (n as f64, j as f64 / n as f64);
    let denom = 1.0 + z * z / nf;
    let centre = (p + z * z / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt();
    let lo = if j == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if j == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// Normal-approximation interval, for comparison with the Wilson one.
pub fn normal_interval(j: usize, n: usize, alpha: f64) -> (f64, f64) {
    let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
    let p = j as f64 / n as f64;
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    ((p - half).max(0.0), (p + half).min(1.0))
}

/// Counts successes of finished runs against `f_ref`.
pub fn tally(runs: &[RunOutput], problem: &Problem, f_ref: f64, seed: u64, budget: usize) -> SuccessStats {
    let successes = runs
        .iter()
        .filter(|r| is_success(r.report.best_f, f_ref, problem.tol_f))
        .count();
    let n = runs.len();
    let (ci_low, ci_high) = wilson_interval(successes, n, 0.05);
    SuccessStats {
        algorithm: runs.first().map_or_else(String::new, |r| r.report.algorithm.clone()),
        problem: problem.name.clone(),
        seed,
        budget,
        runs: n,
        successes,
        p_s: successes as f64 / n.max(1) as f64,
        ci_low,
        ci_high,
        wall_seconds: None,
    }
}

fn best_of(runs: &[RunOutput]) -> f64 {
    runs.iter().map(|r| r.report.best_f).fold(f64::INFINITY, f64::min)
}

/// Runs `algorithm` `n` times with budget `budget` and counts successes.
pub fn run_benchmark(
    algorithm: &Algorithm,
    problem: &Problem,
    n: usize,
    budget: usize,
    seed: u64,
    reference: Reference,
) -> Result<(SuccessStats, Vec<RunOutput>)> {
    if reference == Reference::BestKnown {
        problem.require_f_best()?;
    }
    let start = Instant::now();
    let runs = run_batch(algorithm, problem, n, budget, seed)?;
    let f_ref = reference.resolve(problem, best_of(&runs))?;
    let mut stats = tally(&runs, problem, f_ref, seed, budget);
    stats.algorithm = algorithm.name().to_string();
    stats.wall_seconds = Some(start.elapsed().as_secs_f64());
    Ok((stats, runs))
}

/// Success statistics of several algorithms over several budgets, all
/// judged against one reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub f_ref: f64,
    /// Algorithm-major, budgets ascending within each algorithm.
    pub stats: Vec<SuccessStats>,
    /// Final best value of every run, aligned with `stats`.
    pub best_f: Vec<Vec<f64>>,
}

/// Every algorithm at every budget with `n` runs each; all rows use the same
/// child seeds. With [`Reference::BestFound`] the reference is the best value
/// over every run of the experiment.
pub fn experiment(
    algorithms: &[Algorithm],
    problem: &Problem,
    budgets: &[usize],
    n: usize,
    seed: u64,
    reference: Reference,
) -> Result<Experiment> {
    if n == 0 {
        return Err(Error::InvalidParameter("at least one run is needed".into()));
    }
    if algorithms.is_empty() {
        return Err(Error::InvalidParameter("no algorithm given".into()));
    }
    if budgets.is_empty() || budgets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "budgets must be non-empty and strictly increasing".into(),
        ));
    }
    if reference == Reference::BestKnown {
        problem.require_f_best()?;
    }
    let mut rows = Vec::new();
    for algorithm in algorithms {
        for &budget in budgets {
            let start = Instant::now();
            let runs = run_batch(algorithm, problem, n, budget, seed)?;
            let best: Vec<f64> = runs.iter().map(|r| r.report.best_f).collect();
            rows.push((algorithm.name(), budget, best, start.elapsed().as_secs_f64()));
        }
    }
    let found = rows
        .iter()
        .flat_map(|r| r.2.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let f_ref = reference.resolve(problem, found)?;
    let stats = rows
        .iter()
        .map(|(name, budget, best, wall)| {
            let successes = best.iter().filter(|&&f| is_success(f, f_ref, problem.tol_f)).count();
            let (ci_low, ci_high) = wilson_interval(successes, n, 0.05);
            SuccessStats {
                algorithm: name.to_string(),
                problem: problem.name.clone(),
                seed,
                budget: *budget,
                runs: n,
                successes,
                p_s: successes as f64 / n as f64,
                ci_low,
                ci_high,
                wall_seconds: Some(*wall),
            }
        })
        .collect();
    Ok(Experiment {
        f_ref,
        stats,
        best_f: rows.into_iter().map(|r| r.2).collect(),
    })
}

/// One row per budget; every budget gets fresh runs on the same child seeds.
pub fn performance_curve(
    algorithm: &Algorithm,
    problem: &Problem,
    budgets: &[usize],
    n: usize,
    seed: u64,
    reference: Reference,
) -> Result<Vec<SuccessStats>> {
    experiment(std::slice::from_ref(algorithm), problem, budgets, n, seed, reference).map(|e| e.stats)
}

/// Quantile `χ²_(1)` at upper tail probability `alpha`.
pub fn chi_square_1(alpha: f64) -> f64 {
    ChiSquared::new(1.0)
        .expect("one degree of freedom")
        .inverse_cdf(1.0 - alpha)
}

/// Runs needed so the success rate is known within `d_err` at confidence
/// `1 − alpha`: `n = ceil(0.25 χ²_(1),α / d_err²)`, at least 1.
pub fn required_sample_size(d_err: f64, alpha: f64) -> Result<usize> {
    if !(d_err > 0.0 && d_err < 1.0) || !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "d_err = {d_err} and alpha = {alpha} must both lie in (0, 1)"
        )));
    }
    let n = (0.25 * chi_square_1(alpha) / (d_err * d_err)).ceil();
    Ok((n as usize).max(1))
}

/// Error bound reached with `n` runs, inverse of [`required_sample_size`].
pub fn sample_error(n: usize, alpha: f64) -> f64 {
    (0.25 * chi_square_1(alpha) / n as f64).sqrt()
}

/// Note printed next to sample-size results.
pub const SAMPLE_SIZE_NOTE: &str = "The formula n = ceil(0.25 chi2_(1),alpha / d_err^2) gives 385 runs for \
d_err = 0.05 and alpha = 0.05, and 97 runs for d_err = 0.1. Often-quoted figures are n = 175 and, for \
1000 runs, an error of 0.020857. Neither figure follows from the formula, which gives 0.031 for 1000 runs. \
This tool implements the formula as written.";
