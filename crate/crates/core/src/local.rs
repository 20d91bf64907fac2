//! Bounded Nelder–Mead refinement.
//!
//! Reflection, expansion and contraction points are clipped into the box, so
//! every evaluated point lies in the domain. The search stops when the simplex
//! diameter (largest vertex distance from the best vertex) drops below `tol`
//! or the evaluation budget is spent.

use serde::{Deserialize, Serialize};

use crate::domain::{distance, SearchDomain};
use crate::error::{Error, Result};

/// Which procedure produced a local minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    IdeaContraction,
    MbhSample,
    Harvest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumRecord {
    /// Point in normalized coordinates.
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations_used: usize,
    pub origin: Origin,
    /// Evaluation count of the owning run when the search finished.
    #[serde(default)]
    pub stamp: usize,
    /// Set when the objective was not finite at the starting point.
    #[serde(default)]
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalSearchOptions {
    pub budget: usize,
    pub tol: f64,
    /// Edge of the initial simplex as a fraction of each box side.
    pub initial_step: f64,
}

impl Default for LocalSearchOptions {
    fn default() -> Self {
        Self {
            budget: 0,
            tol: 1e-8,
            initial_step: 0.05,
        }
    }
}

impl LocalSearchOptions {
    /// Defaults for dimension `d`: `500 d` evaluations, tolerance `1e-8`.
    pub fn for_dim(d: usize) -> Self {
        Self {
            budget: 500 * d,
            ..Self::default()
        }
    }

    /// Budget resolved against the dimension (zero means the default).
    pub fn budget_for(&self, d: usize) -> usize {
        if self.budget == 0 {
            500 * d
        } else {
            self.budget
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

struct Counted<'a, O: ?Sized> {
    objective: &'a mut O,
    used: usize,
    budget: usize,
}

impl<O: FnMut(&[f64]) -> f64 + ?Sized> Counted<'_, O> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.used += 1;
        let f = (self.objective)(x);
        if f.is_finite() {
            f
        } else {
            f64::INFINITY
        }
    }

    fn left(&self) -> usize {
        self.budget - self.used
    }
}

fn clip(x: &mut [f64], domain: &SearchDomain) {
    for (j, v) in x.iter_mut().enumerate() {
        *v = v.clamp(domain.lower()[j], domain.upper()[j]);
    }
}

fn affine(c: &[f64], p: &[f64], t: f64, domain: &SearchDomain) -> Vec<f64> {
    let mut x: Vec<f64> = c.iter().zip(p).map(|(ci, pi)| ci + t * (pi - ci)).collect();
    clip(&mut x, domain);
    x
}

/// Minimizes `objective` from `x0` inside `domain`.
///
/// The returned value never exceeds `objective(x0)` and at most
/// `options.budget` evaluations are spent.
pub fn minimize_local<O>(
    objective: &mut O,
    x0: &[f64],
    domain: &SearchDomain,
    options: &LocalSearchOptions,
    origin: Origin,
) -> Result<MinimumRecord>
where
    O: FnMut(&[f64]) -> f64 + ?Sized,
{
    let d = domain.dim();
    if !domain.contains(x0) {
        return Err(Error::InvalidParameter(
            "local search start lies outside the domain".into(),
        ));
    }
    let budget = options.budget_for(d);
    if budget < d + 2 {
        return Err(Error::BudgetTooSmall {
            budget,
            reason: format!("local search in {d} dimensions needs at least {}", d + 2),
        });
    }
    let mut obj = Counted {
        objective,
        used: 0,
        budget,
    };

    let f0 = obj.eval(x0);
    if !f0.is_finite() {
        return Ok(MinimumRecord {
            x: x0.to_vec(),
            f: f0,
            evaluations_used: obj.used,
            origin,
            stamp: 0,
            degenerate: true,
        });
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((x0.to_vec(), f0));
    for j in 0..d {
        let (lo, hi) = (domain.lower()[j], domain.upper()[j]);
        let h = options.initial_step * (hi - lo);
        let mut x = x0.to_vec();
        x[j] = if x0[j] + h <= hi { x0[j] + h } else { x0[j] - h };
        clip(&mut x, domain);
        let f = obj.eval(&x);
        simplex.push((x, f));
    }

    while obj.left() > 0 {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| distance(x, &simplex[0].0))
            .fold(0.0, f64::max);
        if diameter < options.tol {
            break;
        }

        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let (f_best, f_second_worst, f_worst) = (simplex[0].1, simplex[d - 1].1, simplex[d].1);

        let xr = affine(&centroid, &simplex[d].0, -REFLECT, domain);
        let fr = obj.eval(&xr);

        if fr < f_best {
            if obj.left() == 0 {
                simplex[d] = (xr, fr);
                break;
            }
            let xe = affine(&centroid, &xr, EXPAND, domain);
            let fe = obj.eval(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second_worst {
            simplex[d] = (xr, fr);
            continue;
        }
        if obj.left() == 0 {
            if fr < f_worst {
                simplex[d] = (xr, fr);
            }
            break;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = affine(&centroid, &xr, CONTRACT, domain);
            let fc = obj.eval(&xc);
            (xc, fc)
        } else {
            let xc = affine(&centroid, &simplex[d].0, CONTRACT, domain);
            let fc = obj.eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[d] = (xc, fc);
            continue;
        }
        if fr < f_worst {
            simplex[d] = (xr, fr);
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            if obj.left() == 0 {
                break;
            }
            let x = affine(&best, &vertex.0, SHRINK, domain);
            let f = obj.eval(&x);
            *vertex = (x, f);
        }
    }

    let (x, f) = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex is never empty");
    Ok(MinimumRecord {
        x,
        f,
        evaluations_used: obj.used,
        origin,
        stamp: 0,
        degenerate: false,
    })
}
