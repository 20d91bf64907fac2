//! Population dynamics of differential evolution as a discrete map.
//!
//! Every agent carries a position `x`, a velocity `v` and the cached objective
//! value `f`. One generation draws, for every agent, a mask and three indices,
//! builds the differential control `u`, updates the velocity with viscosity
//! `c`, limits the step to `v_max`, projects the candidate back into the unit
//! hypercube and accepts it only on strict improvement. With `c = 1`,
//! `v_max = ∞` this is DE/rand/1/bin or DE/best/1/bin (mutually different
//! indices) or one of the relaxed index variants.
//!
//! All coordinates are normalized to `[0, 1]^d`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{distance, SearchDomain};
use crate::error::{Error, Result};

/// Choice of the base index `i3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// `i3` drawn at random (exploration).
    Rand,
    /// `i3` is the best agent, lowest index on ties (convergence).
    Best,
}

/// Admissible index tuples `(i1, i2, i3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexMode {
    /// `i`, `i1`, `i2`, `i3` pairwise different (classic DE).
    MutuallyDifferent,
    /// `i1` and `i2` drawn independently over the whole population, so
    /// `i1 == i2` happens with probability `1 / n_pop`.
    AllowI1EqI2,
    /// `i2` differs from `i1` and `i3`; `i1 == i3` is allowed.
    AllowI1EqI3,
}

impl IndexMode {
    pub fn min_population(self) -> usize {
        match self {
            IndexMode::MutuallyDifferent => 4,
            IndexMode::AllowI1EqI2 | IndexMode::AllowI1EqI3 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeParams {
    /// Step size `F`.
    pub step_size: f64,
    /// Crossover probability `C_R`.
    pub crossover: f64,
    pub strategy: Strategy,
    pub index_mode: IndexMode,
    /// Viscosity `c`; `1` drops the velocity memory.
    pub viscosity: f64,
    /// Radius of the limit sphere on the displacement; infinite by default.
    pub v_max: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            step_size: 0.9,
            crossover: 0.9,
            strategy: Strategy::Best,
            index_mode: IndexMode::AllowI1EqI2,
            viscosity: 1.0,
            v_max: f64::INFINITY,
        }
    }
}

impl DeParams {
    /// DE/best/1/bin with mutually different indices.
    pub fn best_1_bin(step_size: f64, crossover: f64) -> Self {
        Self {
            step_size,
            crossover,
            strategy: Strategy::Best,
            index_mode: IndexMode::MutuallyDifferent,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "step size F = {} outside (0, 2]",
                self.step_size
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(Error::InvalidParameter(format!(
                "crossover C_R = {} outside [0, 1]",
                self.crossover
            )));
        }
        if !(0.0..=1.0).contains(&self.viscosity) {
            return Err(Error::InvalidParameter(format!(
                "viscosity c = {} outside [0, 1]",
                self.viscosity
            )));
        }
        if self.v_max.is_nan() || self.v_max <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "v_max = {} must be positive",
                self.v_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub agents: Vec<Agent>,
    pub generation: usize,
    /// Largest contraction radius seen since the last (re)initialization.
    pub rho_max: f64,
}

impl Population {
    /// Builds a population at rest from unit-cube points, evaluating each once.
    pub fn from_points<O>(points: Vec<Vec<f64>>, objective: &mut O) -> Result<Self>
    where
        O: FnMut(&[f64]) -> f64 + ?Sized,
    {
        if points.is_empty() {
            return Err(Error::Empty("population"));
        }
        let agents: Vec<Agent> = points
            .into_iter()
            .map(|x| {
                let f = objective(&x);
                let f = if f.is_finite() { f } else { f64::INFINITY };
                let v = vec![0.0; x.len()];
                Agent { x, v, f }
            })
            .collect();
        let mut pop = Self {
            agents,
            generation: 0,
            rho_max: 0.0,
        };
        pop.rho_max = pop.contraction_radius();
        Ok(pop)
    }

    /// Uniform initialization over the unit cube.
    pub fn uniform<O, R>(n_pop: usize, d: usize, objective: &mut O, rng: &mut R) -> Result<Self>
    where
        O: FnMut(&[f64]) -> f64 + ?Sized,
        R: Rng + ?Sized,
    {
        let unit = SearchDomain::unit(d);
        let points = (0..n_pop).map(|_| unit.sample(rng)).collect();
        Self::from_points(points, objective)
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.agents.first().map_or(0, |a| a.x.len())
    }

    /// Index of the best agent; ties go to the lowest index.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, a) in self.agents.iter().enumerate().skip(1) {
            if a.f < self.agents[best].f {
                best = i;
            }
        }
        best
    }

    pub fn best(&self) -> &Agent {
        &self.agents[self.best_index()]
    }

    pub fn contraction_radius(&self) -> f64 {
        let points: Vec<&[f64]> = self.agents.iter().map(|a| a.x.as_slice()).collect();
        contraction_radius(&points).unwrap_or(0.0)
    }

    /// Largest spread of cached objective values.
    pub fn value_spread(&self) -> f64 {
        let (lo, hi) = self
            .agents
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| {
                (lo.min(a.f), hi.max(a.f))
            });
        hi - lo
    }
}

/// Binary crossover mask with one component forced to one.
pub fn draw_mask<R: Rng + ?Sized>(d: usize, crossover: f64, rng: &mut R) -> Vec<bool> {
    assert!(d >= 1, "mask dimension must be positive");
    let forced = rng.random_range(0..d);
    (0..d)
        .map(|j| j == forced || rng.random::<f64>() <= crossover)
        .collect()
}

fn draw_indices<R: Rng + ?Sized>(
    i: usize,
    best: usize,
    n_pop: usize,
    params: &DeParams,
    rng: &mut R,
) -> Result<(usize, usize, usize)> {
    let required = params.index_mode.min_population();
    if n_pop < required {
        return Err(Error::PopulationTooSmall { n_pop, required });
    }
    let pick = |rng: &mut R| rng.random_range(0..n_pop);
    let i3_fixed = match params.strategy {
        Strategy::Best => Some(best),
        Strategy::Rand => None,
    };
    loop {
        let i3 = match i3_fixed {
            Some(b) => b,
            None => pick(rng),
        };
        let i1 = pick(rng);
        let i2 = pick(rng);
        let admissible = match params.index_mode {
            IndexMode::MutuallyDifferent => {
                let base_ok = i3_fixed.is_some() || i3 != i;
                base_ok && i1 != i && i2 != i && i1 != i2 && i1 != i3 && i2 != i3
            }
            IndexMode::AllowI1EqI2 => true,
            IndexMode::AllowI1EqI3 => i2 != i1 && i2 != i3,
        };
        if admissible {
            return Ok((i1, i2, i3));
        }
    }
}

/// One differential control with the draws that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub u: Vec<f64>,
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
    pub mask: Vec<bool>,
}

/// Differential control `u = e ∘ [(x_i3 − x_i) + F (x_i2 − x_i1)]` for agent `i`.
pub fn generate_trial<R: Rng + ?Sized>(pop: &Population, i: usize, params: &DeParams, rng: &mut R) -> Result<Trial> {
    let best = pop.best_index();
    trial_with_best(pop, i, best, params, rng)
}

fn trial_with_best<R: Rng + ?Sized>(
    pop: &Population,
    i: usize,
    best: usize,
    params: &DeParams,
    rng: &mut R,
) -> Result<Trial> {
    let (i1, i2, i3) = draw_indices(i, best, pop.len(), params, rng)?;
    let mask = draw_mask(pop.dim(), params.crossover, rng);
    let (x, x1, x2, x3) = (
        &pop.agents[i].x,
        &pop.agents[i1].x,
        &pop.agents[i2].x,
        &pop.agents[i3].x,
    );
    let u = (0..x.len())
        .map(|j| {
            if mask[j] {
                (x3[j] - x[j]) + params.step_size * (x2[j] - x1[j])
            } else {
                0.0
            }
        })
        .collect();
    Ok(Trial { u, i1, i2, i3, mask })
}

/// Strict-improvement selection.
pub fn select(f_candidate: f64, f_current: f64) -> Result<bool> {
    if !f_candidate.is_finite() || !f_current.is_finite() {
        return Err(Error::NonFinite("select"));
    }
    Ok(f_candidate < f_current)
}

/// Resamples every out-of-bounds component uniformly inside its interval.
/// Returns whether any component was resampled.
pub fn project_into_domain<R: Rng + ?Sized>(x: &mut [f64], domain: &SearchDomain, rng: &mut R) -> bool {
    let mut projected = false;
    for (j, xj) in x.iter_mut().enumerate() {
        let (lo, hi) = (domain.lower()[j], domain.upper()[j]);
        if !(*xj >= lo && *xj <= hi) {
            *xj = lo + rng.random::<f64>() * (hi - lo);
            projected = true;
        }
    }
    projected
}

/// What happened to one agent during a generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
    pub accepted: bool,
    pub projected: bool,
    pub non_finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    /// Generation index after the step.
    pub generation: usize,
    pub step_size: f64,
    pub crossover: f64,
    pub trials: Vec<TrialRecord>,
    pub best_f: f64,
    pub rho: f64,
    pub evaluations: usize,
}

/// Advances the population by one synchronous generation.
///
/// All candidates are built from the current population and evaluated before
/// any acceptance is applied. Consumes exactly `n_pop` evaluations. A
/// non-finite candidate value counts as a rejection.
pub fn step_generation<O, R>(
    pop: &mut Population,
    params: &DeParams,
    objective: &mut O,
    rng: &mut R,
) -> Result<GenerationRecord>
where
    O: FnMut(&[f64]) -> f64 + ?Sized,
    R: Rng + ?Sized,
{
    let n_pop = pop.len();
    if n_pop == 0 {
        return Err(Error::Empty("population"));
    }
    let d = pop.dim();
    let unit = SearchDomain::unit(d);
    let best = pop.best_index();
    let c = params.viscosity;

    let mut candidates = Vec::with_capacity(n_pop);
    for i in 0..n_pop {
        let trial = trial_with_best(pop, i, best, params, rng)?;
        let agent = &pop.agents[i];
        let v_next: Vec<f64> = agent.v.iter().zip(&trial.u).map(|(v, u)| (1.0 - c) * v + u).collect();
        let speed = v_next.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nu = if speed > params.v_max {
            params.v_max / speed
        } else {
            1.0
        };
        let mut x_cand: Vec<f64> = agent.x.iter().zip(&v_next).map(|(x, v)| x + nu * v).collect();
        let projected = project_into_domain(&mut x_cand, &unit, rng);
        candidates.push((trial, v_next, x_cand, projected));
    }

    let values: Vec<f64> = candidates.iter().map(|(_, _, x, _)| objective(x)).collect();

    let mut trials = Vec::with_capacity(n_pop);
    for (i, ((trial, v_next, x_cand, projected), f_cand)) in candidates.into_iter().zip(values).enumerate() {
        let agent = &mut pop.agents[i];
        let non_finite = !f_cand.is_finite();
        if non_finite {
            log::debug!(
                "non-finite objective at generation {} agent {i}; candidate rejected",
                pop.generation
            );
        }
        let accepted = if non_finite {
            false
        } else if !agent.f.is_finite() {
            true
        } else {
            select(f_cand, agent.f)?
        };
        agent.v = v_next;
        if accepted {
            agent.x = x_cand;
            agent.f = f_cand;
        }
        trials.push(TrialRecord {
            i1: trial.i1,
            i2: trial.i2,
            i3: trial.i3,
            accepted,
            projected,
            non_finite,
        });
    }

    pop.generation += 1;
    let rho = pop.contraction_radius();
    pop.rho_max = pop.rho_max.max(rho);
    Ok(GenerationRecord {
        generation: pop.generation,
        step_size: params.step_size,
        crossover: params.crossover,
        trials,
        best_f: pop.best().f,
        rho,
        evaluations: n_pop,
    })
}

/// Largest pairwise Euclidean distance in a set of points.
pub fn contraction_radius(points: &[&[f64]]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Empty("contraction_radius"));
    }
    let mut rho: f64 = 0.0;
    for (a, p) in points.iter().enumerate() {
        for q in &points[a + 1..] {
            rho = rho.max(distance(p, q));
        }
    }
    Ok(rho)
}

/// Probability of an instantaneous total collapse in one generation and of at
/// least one such collapse within `k_h` generations (worst case `i3 = best`).
pub fn collapse_probability(n_pop: usize, crossover: f64, d: usize, k_h: u32) -> (f64, f64) {
    assert!(n_pop >= 2 && d >= 1, "collapse probability needs n_pop >= 2 and d >= 1");
    let per_agent = crossover.powi(d as i32 - 1) / n_pop as f64;
    let p_step = per_agent.powi(n_pop as i32 - 1);
    let p_by_kh = 1.0 - (1.0 - p_step).powi(k_h as i32);
    (p_step, p_by_kh)
}

/// Matrix `J_k` with `X_{k+1} = J_k X_k` for a generation with `C_R = 1`.
///
/// Rejected agents keep an identity row; accepted agent `i` gets `1` at `i3`,
/// `+F` at `i2` and `−F` at `i1` (summed when indices coincide). Rows of
/// candidates that were projected back into the domain are still written as
/// the linear image.
pub fn generation_matrix(record: &GenerationRecord) -> Result<DMatrix<f64>> {
    if record.crossover < 1.0 {
        return Err(Error::UnsupportedDiagnostic(format!(
            "generation matrix needs C_R = 1, record has C_R = {}",
            record.crossover
        )));
    }
    let n = record.trials.len();
    let mut j = DMatrix::zeros(n, n);
    for (i, t) in record.trials.iter().enumerate() {
        if t.accepted {
            j[(i, t.i3)] += 1.0;
            j[(i, t.i2)] += record.step_size;
            j[(i, t.i1)] -= record.step_size;
        } else {
            j[(i, i)] = 1.0;
        }
    }
    Ok(j)
}

/// Moduli of the eigenvalues of `J_k`, sorted descending.
pub fn generation_spectrum(record: &GenerationRecord) -> Result<Vec<f64>> {
    let j = generation_matrix(record)?;
    let mut moduli: Vec<f64> = j.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(moduli)
}

/// Serializes generation records as CSV lines `generation,best_f,rho,evaluations`,
/// where `evaluations` is cumulative from `offset`.
pub fn trace_csv(records: &[GenerationRecord], offset: usize) -> String {
    let mut out = String::from("generation,best_f,rho,evaluations\n");
    let mut used = offset;
    for r in records {
        used += r.evaluations;
        out.push_str(&format!("{},{:e},{:e},{}\n", r.generation, r.best_f, r.rho, used));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| (v - 0.5).powi(2)).sum()
    }

    fn pop_at(points: Vec<Vec<f64>>) -> Population {
        Population::from_points(points, &mut sphere).unwrap()
    }

    #[test]
    fn full_crossover_mask_is_all_ones() {
        let mut r = rng::master(1);
        assert_eq!(draw_mask(5, 1.0, &mut r), vec![true; 5]);
    }

    #[test]
    fn one_dimensional_mask_is_forced() {
        let mut r = rng::master(2);
        for _ in 0..100 {
            assert_eq!(draw_mask(1, 0.0, &mut r), vec![true]);
        }
    }

    #[test]
    fn mask_count_matches_binomial_model() {
        // E[ones] = 1 + (d-1) C_R, Var = (d-1) C_R (1-C_R) per draw.
        let (d, cr, draws) = (10, 0.8, 100_000);
        let mut r = rng::master(3);
        let total: usize = (0..draws)
            .map(|_| draw_mask(d, cr, &mut r).iter().filter(|&&e| e).count())
            .sum();
        let mean = total as f64 / draws as f64;
        let expected = 1.0 + (d - 1) as f64 * cr;
        let sigma = ((d - 1) as f64 * cr * (1.0 - cr) / draws as f64).sqrt();
        assert!(
            (mean - expected).abs() < 3.0 * sigma,
            "mean {mean} vs {expected} ± {sigma}"
        );
    }

    #[test]
    fn trial_reduces_to_base_difference_when_indices_coincide() {
        let pop = pop_at(vec![vec![0.1, 0.2], vec![0.7, 0.4], vec![0.5, 0.5]]);
        let params = DeParams {
            step_size: 0.8,
            crossover: 1.0,
            ..DeParams::default()
        };
        let mut r = rng::master(4);
        let mut seen = false;
        for _ in 0..200 {
            let t = generate_trial(&pop, 0, &params, &mut r).unwrap();
            assert_eq!(t.i3, 2);
            if t.i1 == t.i2 {
                seen = true;
                assert_eq!(t.u, vec![0.5 - 0.1, 0.5 - 0.2]);
            }
        }
        assert!(seen);
    }

    #[test]
    fn zero_step_at_base_point_gives_zero_control() {
        let pop = pop_at(vec![vec![0.5, 0.5], vec![0.1, 0.9], vec![0.3, 0.3], vec![0.8, 0.2]]);
        let params = DeParams {
            step_size: 1e-300,
            crossover: 1.0,
            strategy: Strategy::Best,
            index_mode: IndexMode::AllowI1EqI2,
            ..DeParams::default()
        };
        let mut r = rng::master(5);
        let t = generate_trial(&pop, 0, &params, &mut r).unwrap();
        assert!(t.u.iter().all(|u| u.abs() < 1e-299));
    }

    #[test]
    fn trial_matches_scripted_arithmetic() {
        let points = vec![
            vec![0.10, 0.90, 0.40],
            vec![0.70, 0.20, 0.55],
            vec![0.45, 0.50, 0.48],
            vec![0.30, 0.65, 0.05],
        ];
        let pop = pop_at(points.clone());
        let params = DeParams {
            step_size: 0.6,
            crossover: 0.5,
            strategy: Strategy::Rand,
            index_mode: IndexMode::MutuallyDifferent,
            ..DeParams::default()
        };
        let mut r = rng::master(6);
        for i in 0..4 {
            let t = generate_trial(&pop, i, &params, &mut r).unwrap();
            let ids = [i, t.i1, t.i2, t.i3];
            for a in 0..4 {
                for b in a + 1..4 {
                    assert_ne!(ids[a], ids[b]);
                }
            }
            assert!(t.mask.iter().any(|&e| e));
            for j in 0..3 {
                let expected = if t.mask[j] {
                    (points[t.i3][j] - points[i][j]) + 0.6 * (points[t.i2][j] - points[t.i1][j])
                } else {
                    0.0
                };
                assert_eq!(t.u[j], expected);
            }
        }
    }

    #[test]
    fn too_small_population_is_rejected() {
        let pop = pop_at(vec![vec![0.1], vec![0.2], vec![0.3]]);
        let params = DeParams::best_1_bin(0.5, 0.5);
        let err = generate_trial(&pop, 0, &params, &mut rng::master(0)).unwrap_err();
        assert!(matches!(err, Error::PopulationTooSmall { n_pop: 3, required: 4 }));
    }

    #[test]
    fn selection_is_strict() {
        assert!(select(1.0, 2.0).unwrap());
        assert!(!select(2.0, 2.0).unwrap());
        assert!(!select(3.0, 2.0).unwrap());
        assert!(select(f64::NAN, 1.0).is_err());
        assert!(select(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn projection_only_touches_violating_components() {
        let dom = SearchDomain::new(vec![0.0, -1.0, 2.0], vec![1.0, 1.0, 3.0]).unwrap();
        let mut r = rng::master(7);
        let mut inside = vec![0.5, 0.0, 2.5];
        assert!(!project_into_domain(&mut inside, &dom, &mut r));
        assert_eq!(inside, vec![0.5, 0.0, 2.5]);
        let mut x = vec![0.5, 1.5, 2.5];
        assert!(project_into_domain(&mut x, &dom, &mut r));
        assert_eq!((x[0], x[2]), (0.5, 2.5));
        assert!((-1.0..=1.0).contains(&x[1]));
        let mut all = vec![-3.0, 9.0, f64::NAN];
        project_into_domain(&mut all, &dom, &mut r);
        assert!(dom.contains(&all));
    }

    #[test]
    fn identical_population_is_a_fixed_point() {
        let p = vec![0.3, 0.6, 0.9];
        let mut pop = pop_at(vec![p.clone(); 6]);
        let before = pop.clone();
        let mut r = rng::master(8);
        for _ in 0..20 {
            step_generation(&mut pop, &DeParams::default(), &mut sphere, &mut r).unwrap();
        }
        for (a, b) in pop.agents.iter().zip(&before.agents) {
            assert_eq!(a.x, b.x);
            assert_eq!(a.f, b.f);
        }
    }

    #[test]
    fn elitism_on_paraboloid() {
        let mut r = rng::master(9);
        let mut pop = Population::uniform(10, 4, &mut sphere, &mut r).unwrap();
        let params = DeParams {
            strategy: Strategy::Best,
            ..DeParams::default()
        };
        let mut best = pop.best().f;
        for _ in 0..100 {
            let old: Vec<f64> = pop.agents.iter().map(|a| a.f).collect();
            let rec = step_generation(&mut pop, &params, &mut sphere, &mut r).unwrap();
            assert_eq!(rec.evaluations, 10);
            for (a, f_old) in pop.agents.iter().zip(old) {
                assert!(a.f <= f_old);
                assert_eq!(a.f, sphere(&a.x));
                assert!(a.x.iter().all(|v| (0.0..=1.0).contains(v)));
            }
            assert!(rec.best_f <= best);
            best = rec.best_f;
        }
    }

    #[test]
    fn step_replays_from_recorded_draws() {
        // Re-execute three generations by hand from the same stream and compare.
        let params = DeParams {
            step_size: 0.7,
            crossover: 0.6,
            strategy: Strategy::Best,
            index_mode: IndexMode::AllowI1EqI3,
            ..DeParams::default()
        };
        let mut r = rng::master(10);
        let mut pop = Population::uniform(5, 3, &mut sphere, &mut r).unwrap();
        let mut shadow: Vec<(Vec<f64>, f64)> = pop.agents.iter().map(|a| (a.x.clone(), a.f)).collect();

        let mut r_impl = rng::master(11);
        let mut r_replay = rng::master(11);
        for _ in 0..3 {
            step_generation(&mut pop, &params, &mut sphere, &mut r_impl).unwrap();

            let n = shadow.len();
            let mut best = 0;
            for i in 1..n {
                if shadow[i].1 < shadow[best].1 {
                    best = i;
                }
            }
            let mut cands = Vec::new();
            for i in 0..n {
                let (i1, i2) = loop {
                    let i1 = r_replay.random_range(0..n);
                    let i2 = r_replay.random_range(0..n);
                    if i2 != i1 && i2 != best {
                        break (i1, i2);
                    }
                };
                let forced = r_replay.random_range(0..3);
                let mask: Vec<bool> = (0..3).map(|j| j == forced || r_replay.random::<f64>() <= 0.6).collect();
                let mut c: Vec<f64> = (0..3)
                    .map(|j| {
                        let x = &shadow[i].0;
                        let u = if mask[j] {
                            (shadow[best].0[j] - x[j]) + 0.7 * (shadow[i2].0[j] - shadow[i1].0[j])
                        } else {
                            0.0
                        };
                        x[j] + u
                    })
                    .collect();
                for v in c.iter_mut() {
                    if !(0.0..=1.0).contains(v) {
                        *v = r_replay.random::<f64>();
                    }
                }
                cands.push(c);
            }
            for (i, c) in cands.into_iter().enumerate() {
                let f = sphere(&c);
                if f < shadow[i].1 {
                    shadow[i] = (c, f);
                }
            }
            for (a, s) in pop.agents.iter().zip(&shadow) {
                assert_eq!(a.x, s.0);
                assert_eq!(a.f, s.1);
            }
        }
    }

    #[test]
    fn velocity_limit_caps_step_length() {
        let params = DeParams {
            viscosity: 0.5,
            v_max: 0.01,
            crossover: 1.0,
            ..DeParams::default()
        };
        let mut r = rng::master(12);
        let mut pop = Population::uniform(8, 3, &mut sphere, &mut r).unwrap();
        for _ in 0..10 {
            let before: Vec<Vec<f64>> = pop.agents.iter().map(|a| a.x.clone()).collect();
            let rec = step_generation(&mut pop, &params, &mut sphere, &mut r).unwrap();
            for ((a, b), t) in pop.agents.iter().zip(&before).zip(&rec.trials) {
                if t.accepted && !t.projected {
                    assert!(distance(&a.x, b) <= 0.01 + 1e-15);
                }
            }
        }
    }

    #[test]
    fn non_finite_candidates_are_rejected() {
        let mut r = rng::master(13);
        let mut pop = Population::uniform(6, 2, &mut sphere, &mut r).unwrap();
        let mut calls = 0usize;
        let mut nan_objective = |_: &[f64]| {
            calls += 1;
            f64::NAN
        };
        let before = pop.clone();
        let rec = step_generation(&mut pop, &DeParams::default(), &mut nan_objective, &mut r).unwrap();
        assert_eq!(calls, 6);
        assert!(rec.trials.iter().all(|t| t.non_finite && !t.accepted));
        for (a, b) in pop.agents.iter().zip(&before.agents) {
            assert_eq!(a.x, b.x);
        }
    }

    #[test]
    fn contraction_radius_cases() {
        let p = [0.2, 0.4];
        assert_eq!(contraction_radius(&[&p, &p, &p]).unwrap(), 0.0);
        assert_eq!(contraction_radius(&[&[0.0, 0.0][..], &[1.0, 0.0][..]]).unwrap(), 1.0);
        assert!(contraction_radius(&[]).is_err());
    }

    #[test]
    fn contraction_radius_matches_brute_force() {
        let mut r = rng::master(14);
        let pts: Vec<Vec<f64>> = (0..6).map(|_| SearchDomain::unit(4).sample(&mut r)).collect();
        let mut brute: f64 = 0.0;
        for a in &pts {
            for b in &pts {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                brute = brute.max(d2.sqrt());
            }
        }
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        assert_eq!(contraction_radius(&refs).unwrap(), brute);
    }

    #[test]
    fn collapse_probability_closed_forms() {
        for d in [1, 3, 10] {
            let (p, _) = collapse_probability(2, 1.0, d, 1);
            assert_eq!(p, 0.5);
        }
        let (p, pk) = collapse_probability(5, 0.7, 4, 1);
        assert!((p - pk).abs() < 1e-15);
        let (p, pk) = collapse_probability(3, 0.9, 2, 10);
        assert!((p - (0.9f64 / 3.0).powi(2)).abs() < 1e-15);
        assert!((pk - (1.0 - (1.0 - p).powi(10))).abs() < 1e-15);
    }

    #[test]
    fn rejected_generation_has_unit_spectrum() {
        let rec = GenerationRecord {
            generation: 1,
            step_size: 0.8,
            crossover: 1.0,
            trials: (0..5)
                .map(|_| TrialRecord {
                    i1: 0,
                    i2: 1,
                    i3: 2,
                    accepted: false,
                    projected: false,
                    non_finite: false,
                })
                .collect(),
            best_f: 0.0,
            rho: 0.0,
            evaluations: 5,
        };
        assert_eq!(generation_matrix(&rec).unwrap(), DMatrix::identity(5, 5));
        let moduli = generation_spectrum(&rec).unwrap();
        assert!(moduli.iter().all(|m| (m - 1.0).abs() < 1e-12));
    }

    #[test]
    fn single_collapsing_row_spectrum() {
        // I with row 2 replaced by e_0 is a rank-one update of I: eigenvalues
        // are 1 (n-1 times) and 1 + (e_0 - e_2)·e_2 = 0.
        let n = 5;
        let trials = (0..n)
            .map(|i| TrialRecord {
                i1: 3,
                i2: 3,
                i3: 0,
                accepted: i == 2,
                projected: false,
                non_finite: false,
            })
            .collect();
        let rec = GenerationRecord {
            generation: 1,
            step_size: 0.8,
            crossover: 1.0,
            trials,
            best_f: 0.0,
            rho: 0.0,
            evaluations: n,
        };
        let j = generation_matrix(&rec).unwrap();
        assert_eq!(j[(2, 0)], 1.0);
        assert_eq!(j.row(2).iter().filter(|v| **v != 0.0).count(), 1);
        let moduli = generation_spectrum(&rec).unwrap();
        assert_eq!(moduli.len(), n);
        for m in &moduli[..n - 1] {
            assert!((m - 1.0).abs() < 1e-10);
        }
        assert!(moduli[n - 1].abs() < 1e-10);
    }

    #[test]
    fn spectrum_needs_full_crossover() {
        let rec = GenerationRecord {
            generation: 1,
            step_size: 0.8,
            crossover: 0.9,
            trials: vec![],
            best_f: 0.0,
            rho: 0.0,
            evaluations: 0,
        };
        assert!(matches!(
            generation_spectrum(&rec),
            Err(Error::UnsupportedDiagnostic(_))
        ));
    }

    #[test]
    fn determinism() {
        let run = || {
            let mut r = rng::child(42, 1);
            let mut pop = Population::uniform(8, 3, &mut sphere, &mut r).unwrap();
            for _ in 0..25 {
                step_generation(&mut pop, &DeParams::default(), &mut sphere, &mut r).unwrap();
            }
            pop
        };
        assert_eq!(run(), run());
    }
}
