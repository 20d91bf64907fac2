//! Monotonic basin hopping.
//!
//! The current local minimum is perturbed inside a box of half-width `delta`,
//! refined, and replaced only by a strictly better minimum. With a finite
//! `n_samples` the walk restarts from a uniform point after that many
//! consecutive failures (MBH-GR).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{sample_box_in_unit, SearchDomain};
use crate::error::{Error, Result};
use crate::idea::RunOutput;
use crate::local::{minimize_local, LocalSearchOptions, MinimumRecord, Origin};
use crate::problems::Problem;
use crate::report::{Archive, Evaluator, RestartEvent, RestartKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MbhParams {
    /// Perturbation half-width in unit coordinates.
    pub delta: f64,
    /// Consecutive failures before a global restart; `None` never restarts.
    pub n_samples: Option<usize>,
    pub local: LocalSearchOptions,
}

impl Default for MbhParams {
    fn default() -> Self {
        Self {
            delta: 0.1,
            n_samples: None,
            local: LocalSearchOptions::default(),
        }
    }
}

impl MbhParams {
    /// MBH-GR with the usual 30 failures before restarting.
    pub fn with_restart() -> Self {
        Self {
            n_samples: Some(30),
            ..Self::default()
        }
    }
}

/// Uniform point in `[x_l − delta, x_l + delta]^d ∩ [0, 1]^d`.
pub fn sample_neighborhood<R: Rng + ?Sized>(x_l: &[f64], delta: f64, rng: &mut R) -> Vec<f64> {
    sample_box_in_unit(x_l, delta, rng)
}

/// One MBH run. Every refined minimum, accepted or not, goes to the archive.
pub fn run_mbh<R: Rng + ?Sized>(
    problem: &Problem,
    params: &MbhParams,
    budget: usize,
    rng: &mut R,
) -> Result<RunOutput> {
    let d = problem.dim();
    if !(params.delta >= 0.0 && params.delta <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "delta = {} outside [0, 1]",
            params.delta
        )));
    }
    if params.n_samples == Some(0) {
        return Err(Error::InvalidParameter("n_samples must be positive".into()));
    }
    let local_budget = params.local.budget_for(d);
    if budget < local_budget || local_budget < d + 2 {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: format!("one local search needs {local_budget} evaluations"),
        });
    }
    let unit = SearchDomain::unit(d);
    let mut ev = Evaluator::new(problem, budget);
    let mut archive = Archive::new();
    let mut restarts = Vec::new();
    let mut local_searches = 0;

    let mut refine = |ev: &mut Evaluator, x0: &[f64], origin: Origin| -> Result<MinimumRecord> {
        // The last search is cut to what is left, but never below a simplex.
        let options = LocalSearchOptions {
            budget: local_budget.min(ev.remaining().max(d + 2)),
            ..params.local
        };
        let mut rec = minimize_local(&mut |u: &[f64]| ev.eval(u), x0, &unit, &options, origin)?;
        rec.stamp = ev.used();
        local_searches += 1;
        Ok(rec)
    };

    let x0 = unit.sample(rng);
    let mut current = refine(&mut ev, &x0, Origin::MbhSample)?;
    archive.push(current.clone());
    let mut failures = 0usize;
    while !ev.exhausted() {
        let y = sample_neighborhood(&current.x, params.delta, rng);
        let rec = refine(&mut ev, &y, Origin::MbhSample)?;
        archive.push(rec.clone());
        if rec.f < current.f {
            current = rec;
            failures = 0;
        } else {
            failures += 1;
        }
        if params.n_samples.is_some_and(|n| failures >= n) && !ev.exhausted() {
            let x0 = unit.sample(rng);
            current = refine(&mut ev, &x0, Origin::MbhSample)?;
            archive.push(current.clone());
            failures = 0;
            restarts.push(RestartEvent {
                evaluations: ev.used(),
                kind: RestartKind::Global,
            });
        }
    }

    let name = if params.n_samples.is_some() { "mbh-gr" } else { "mbh" };
    let mut report = ev.into_report(name, 0, 0);
    report.restarts = restarts;
    report.local_searches = local_searches;
    Ok(RunOutput { report, archive })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::distance;
    use crate::problems::{by_name, Tuning};
    use crate::rng;
    use std::sync::Arc;

    fn problem_from(
        name: &str,
        lo: f64,
        hi: f64,
        d: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Problem {
        Problem {
            name: name.into(),
            domain: SearchDomain::cube(d, lo, hi).unwrap(),
            objective: Arc::new(f),
            f_best: Some(0.0),
            x_best: None,
            tol_f: 1e-4,
            level_edges: None,
            tuning: Tuning {
                n_pop: 20,
                delta: 0.2,
                iun_max: None,
            },
        }
    }

    #[test]
    fn neighborhood_samples() {
        let mut r = rng::master(1);
        let x = vec![0.5, 0.5, 0.5];
        assert_eq!(sample_neighborhood(&x, 0.0, &mut r), x);
        for _ in 0..100 {
            let y = sample_neighborhood(&x, 0.1, &mut r);
            assert!(y.iter().zip(&x).all(|(a, b)| (a - b).abs() <= 0.1));
            let z = sample_neighborhood(&[1.0, 0.0, 0.5], 0.3, &mut r);
            assert!(z.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn escapes_to_the_global_funnel_in_one_dimension() {
        let p = by_name("rastrigin", Some(1)).unwrap();
        let params = MbhParams {
            delta: 0.15,
            ..MbhParams::default()
        };
        let out = run_mbh(&p, &params, 20_000, &mut rng::master(5)).unwrap();
        assert!(out.report.best_f < 1e-4, "best {}", out.report.best_f);
    }

    #[test]
    fn tiny_perturbation_never_leaves_the_first_basin() {
        let p = by_name("rastrigin", Some(2)).unwrap();
        let params = MbhParams {
            delta: 1e-9,
            ..MbhParams::default()
        };
        let out = run_mbh(&p, &params, 20_000, &mut rng::master(7)).unwrap();
        let first = &out.archive.records[0];
        assert!(out.archive.records.iter().all(|r| distance(&r.x, &first.x) < 1e-3));
    }

    #[test]
    fn flat_objective_restarts_every_thirty_samples() {
        let p = problem_from("flat", 0.0, 1.0, 2, |_| 1.0);
        let out = run_mbh(&p, &MbhParams::with_restart(), 50_000, &mut rng::master(3)).unwrap();
        assert!(out.report.restarts.len() > 3);
        // Archive order: first minimum, then 30 failed samples before each
        // restart minimum, then fewer than 31 trailing samples.
        let positions: Vec<usize> = out
            .report
            .restarts
            .iter()
            .map(|e| {
                out.archive
                    .records
                    .iter()
                    .position(|r| r.stamp == e.evaluations)
                    .unwrap()
            })
            .collect();
        let mut previous = 0;
        for p in &positions {
            assert_eq!(p - previous, 31);
            previous = *p;
        }
        assert!(out.archive.len() - 1 - previous <= 30);
        assert_eq!(out.report.algorithm, "mbh-gr");
    }

    #[test]
    fn best_value_is_the_archive_minimum() {
        let p = by_name("rastrigin", Some(3)).unwrap();
        let out = run_mbh(&p, &MbhParams::with_restart(), 20_000, &mut rng::master(2)).unwrap();
        assert_eq!(out.report.best_f, out.archive.f_min());
        assert!(out
            .archive
            .records
            .iter()
            .all(|r| r.x.iter().all(|v| (0.0..=1.0).contains(v))));
        assert!(out.report.evaluations <= 20_000 + 3 * 500);
    }

    #[test]
    fn budget_below_one_local_search_is_rejected() {
        let p = by_name("paraboloid", Some(4)).unwrap();
        assert!(matches!(
            run_mbh(&p, &MbhParams::default(), 100, &mut rng::master(1)),
            Err(Error::BudgetTooSmall { .. })
        ));
    }
}
