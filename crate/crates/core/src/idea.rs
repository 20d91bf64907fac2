//! Inflationary differential evolution.
//!
//! DE runs until the population contracts below `tol_conv` times the largest
//! radius seen since the last (re)initialization. The best agent is then
//! refined by a local search and archived. The population is re-inflated
//! inside a box of half-width `delta` around the refined point, unless the
//! archive best has failed to improve more than `iun_max` times in a row. In
//! that case the archive is clustered and the population is resampled over
//! the whole domain away from the cluster centres.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::de::{step_generation, DeParams, Population};
use crate::domain::{distance, sample_box_in_unit, SearchDomain};
use crate::error::{Error, Result};
use crate::local::{minimize_local, LocalSearchOptions, MinimumRecord, Origin};
use crate::problems::Problem;
use crate::report::{Archive, Evaluator, RestartEvent, RestartKind, RunReport};

/// Generations per epoch after which the local search runs even without
/// contraction.
pub const DEFAULT_MAX_GENERATIONS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdeaParams {
    pub de: DeParams,
    pub n_pop: usize,
    /// Contraction trigger as a fraction of the largest radius of the epoch.
    pub tol_conv: f64,
    /// Bubble half-width in unit coordinates.
    pub delta: f64,
    /// Exclusion radius around archive clusters at a global restart.
    pub delta_c: f64,
    /// Unimproved local searches tolerated before a global restart; `None`
    /// never restarts globally.
    pub iun_max: Option<usize>,
    pub local: LocalSearchOptions,
    pub max_generations: usize,
}

impl Default for IdeaParams {
    fn default() -> Self {
        Self {
            de: DeParams::default(),
            n_pop: 20,
            tol_conv: 0.25,
            delta: 0.2,
            delta_c: 0.1,
            iun_max: None,
            local: LocalSearchOptions::default(),
            max_generations: DEFAULT_MAX_GENERATIONS,
        }
    }
}

impl IdeaParams {
    /// Defaults with the problem's population size, bubble and restart limit.
    pub fn for_problem(problem: &Problem) -> Self {
        Self {
            n_pop: problem.tuning.n_pop,
            delta: problem.tuning.delta,
            iun_max: problem.tuning.iun_max,
            ..Self::default()
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        self.de.validate()?;
        let required = self.de.index_mode.min_population();
        if self.n_pop < required {
            return Err(Error::PopulationTooSmall {
                n_pop: self.n_pop,
                required,
            });
        }
        if !(self.tol_conv > 0.0 && self.tol_conv < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "tol_conv = {} outside (0, 1)",
                self.tol_conv
            )));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} outside (0, 1]",
                self.delta
            )));
        }
        if !(self.delta_c > 0.0 && self.delta_c < (d as f64).sqrt()) {
            return Err(Error::InvalidParameter(format!(
                "delta_c = {} outside (0, sqrt(d))",
                self.delta_c
            )));
        }
        if self.max_generations == 0 {
            return Err(Error::InvalidParameter("max_generations must be positive".into()));
        }
        Ok(())
    }
}

/// Report and archive of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub archive: Archive,
}

/// `n_pop` agents uniform in `[x_l − delta, x_l + delta]^d ∩ [0, 1]^d`, at rest.
pub fn bubble_restart<O, R>(x_l: &[f64], delta: f64, n_pop: usize, objective: &mut O, rng: &mut R) -> Result<Population>
where
    O: FnMut(&[f64]) -> f64 + ?Sized,
    R: Rng + ?Sized,
{
    let points = (0..n_pop).map(|_| sample_box_in_unit(x_l, delta, rng)).collect();
    Population::from_points(points, objective)
}

/// Single-linkage clusters of the archived points (pairs closer than
/// `radius` are linked). Returns the barycentre of each cluster, ordered by
/// the first member's position in the archive.
pub fn cluster_archive(records: &[MinimumRecord], radius: f64) -> Vec<Vec<f64>> {
    let n = records.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            if distance(&records[a].x, &records[b].x) < radius {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut order: Vec<usize> = Vec::new();
    let mut sums: std::collections::HashMap<usize, (Vec<f64>, usize)> = std::collections::HashMap::new();
    for (i, r) in records.iter().enumerate() {
        let c = root(&mut parent, i);
        let entry = sums.entry(c).or_insert_with(|| {
            order.push(c);
            (vec![0.0; r.x.len()], 0)
        });
        for (s, v) in entry.0.iter_mut().zip(&r.x) {
            *s += v;
        }
        entry.1 += 1;
    }
    order
        .into_iter()
        .map(|c| {
            let (sum, count) = &sums[&c];
            sum.iter().map(|s| s / *count as f64).collect()
        })
        .collect()
}

/// Uniform unit-cube points farther than `delta_c` from every centre.
///
/// Each point gets at most `max_attempts` draws; when none is admissible the
/// draw farthest from the centres is kept. Returns the points and how many of
/// them violate the exclusion.
pub fn exclusion_sample<R: Rng + ?Sized>(
    d: usize,
    centers: &[Vec<f64>],
    delta_c: f64,
    n_pop: usize,
    max_attempts: usize,
    rng: &mut R,
) -> (Vec<Vec<f64>>, usize) {
    let unit = SearchDomain::unit(d);
    let clearance = |x: &[f64]| centers.iter().map(|c| distance(x, c)).fold(f64::INFINITY, f64::min);
    let mut infeasible = 0;
    let points = (0..n_pop)
        .map(|_| {
            let mut best: Option<(Vec<f64>, f64)> = None;
            for _ in 0..max_attempts.max(1) {
                let x = unit.sample(rng);
                let gap = clearance(&x);
                if gap > delta_c {
                    return x;
                }
                if best.as_ref().is_none_or(|(_, g)| gap > *g) {
                    best = Some((x, gap));
                }
            }
            infeasible += 1;
            best.expect("at least one draw").0
        })
        .collect();
    (points, infeasible)
}

/// Global re-initialization away from the archive clusters.
pub fn global_restart<O, R>(
    d: usize,
    centers: &[Vec<f64>],
    delta_c: f64,
    n_pop: usize,
    max_attempts: usize,
    objective: &mut O,
    rng: &mut R,
) -> Result<Population>
where
    O: FnMut(&[f64]) -> f64 + ?Sized,
    R: Rng + ?Sized,
{
    let (points, infeasible) = exclusion_sample(d, centers, delta_c, n_pop, max_attempts, rng);
    if infeasible > 0 {
        log::warn!("{infeasible} of {n_pop} agents could not be placed outside the {delta_c} exclusion radius");
    }
    Population::from_points(points, objective)
}

/// One IDEA run with `budget` objective evaluations.
///
/// DE generations run only while a whole generation fits in the remaining
/// budget; a local search that starts before the budget runs out may finish
/// past it.
pub fn run_idea<R: Rng + ?Sized>(
    problem: &Problem,
    params: &IdeaParams,
    budget: usize,
    rng: &mut R,
) -> Result<RunOutput> {
    let d = problem.dim();
    params.validate(d)?;
    let n_pop = params.n_pop;
    if budget < n_pop {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: format!("one generation needs {n_pop} evaluations"),
        });
    }
    let unit = SearchDomain::unit(d);
    let local = LocalSearchOptions {
        budget: params.local.budget_for(d),
        ..params.local
    };
    let max_attempts = 100 * n_pop;

    let mut ev = Evaluator::new(problem, budget);
    let mut archive = Archive::new();
    let mut restarts = Vec::new();
    let mut local_searches = 0;
    let mut pop = Population::uniform(n_pop, d, &mut |u: &[f64]| ev.eval(u), rng)?;
    let mut f_min = f64::INFINITY;
    let mut iun = 0usize;
    let mut epoch_generations = 0usize;

    while ev.remaining() >= n_pop {
        let record = step_generation(&mut pop, &params.de, &mut |u: &[f64]| ev.eval(u), rng)?;
        epoch_generations += 1;
        let contracted = record.rho < params.tol_conv * pop.rho_max;
        if !contracted && epoch_generations < params.max_generations {
            continue;
        }
        if ev.exhausted() {
            break;
        }

        let best = pop.best().clone();
        let mut rec = minimize_local(
            &mut |u: &[f64]| ev.eval(u),
            &best.x,
            &unit,
            &local,
            Origin::IdeaContraction,
        )?;
        rec.stamp = ev.used();
        local_searches += 1;
        let (center, f_center) = if rec.f <= best.f {
            (rec.x.clone(), rec.f)
        } else {
            (best.x.clone(), best.f)
        };
        archive.push(rec);
        if f_center < f_min {
            f_min = f_center;
            iun = 0;
        } else {
            iun += 1;
        }
        if ev.remaining() < n_pop {
            break;
        }

        let kind = if params.iun_max.is_none_or(|m| iun <= m) {
            pop = bubble_restart(&center, params.delta, n_pop, &mut |u: &[f64]| ev.eval(u), rng)?;
            RestartKind::Bubble
        } else {
            let centers = cluster_archive(&archive.records, params.delta_c);
            pop = global_restart(
                d,
                &centers,
                params.delta_c,
                n_pop,
                max_attempts,
                &mut |u: &[f64]| ev.eval(u),
                rng,
            )?;
            RestartKind::Global
        };
        restarts.push(RestartEvent {
            evaluations: ev.used(),
            kind,
        });
        epoch_generations = 0;
    }

    let mut report = ev.into_report("idea", 0, 0);
    report.restarts = restarts;
    report.local_searches = local_searches;
    Ok(RunOutput { report, archive })
}

/// Plain DE baseline: generations until the budget no longer fits one.
pub fn run_de<R: Rng + ?Sized>(
    problem: &Problem,
    de: &DeParams,
    n_pop: usize,
    budget: usize,
    rng: &mut R,
) -> Result<RunOutput> {
    de.validate()?;
    let required = de.index_mode.min_population();
    if n_pop < required {
        return Err(Error::PopulationTooSmall { n_pop, required });
    }
    if budget < n_pop {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: format!("one generation needs {n_pop} evaluations"),
        });
    }
    let d = problem.dim();
    let mut ev = Evaluator::new(problem, budget);
    let mut pop = Population::uniform(n_pop, d, &mut |u: &[f64]| ev.eval(u), rng)?;
    while ev.remaining() >= n_pop {
        step_generation(&mut pop, de, &mut |u: &[f64]| ev.eval(u), rng)?;
    }
    Ok(RunOutput {
        report: ev.into_report("de", 0, 0),
        archive: Archive::new(),
    })
}
