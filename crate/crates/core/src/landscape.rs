//! Funnel analysis of archived local minima.
//!
//! Minima are grouped into objective-value levels. For each minimum the
//! intra-level distance `d_il` is its mean distance to the other minima of its
//! level, and the trans-level distance `d_tl` is its mean distance to the
//! minima of the next lower occupied level (or to the best-known point for
//! the lowest occupied level). Distances are in unit coordinates.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{distance, SearchDomain};
use crate::error::{Error, Result};
use crate::local::{minimize_local, LocalSearchOptions, MinimumRecord, Origin};
use crate::problems::Problem;
use crate::report::Archive;
use crate::rng;

/// Near-duplicate thresholds used when merging harvested minima.
pub const MERGE_DX: f64 = 1e-4;
pub const MERGE_DF: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelPartition {
    /// Interior thresholds, strictly increasing. Level `k` holds
    /// `edges[k-1] <= f < edges[k]`, so there are `edges.len() + 1` levels.
    pub edges: Vec<f64>,
    pub records: Vec<MinimumRecord>,
    /// Level of each record, 0 for the lowest.
    pub level: Vec<usize>,
}

impl LevelPartition {
    pub fn n_levels(&self) -> usize {
        self.edges.len() + 1
    }

    /// Record indices in level `k`.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.records.len()).filter(|&i| self.level[i] == k).collect()
    }
}

fn level_of(f: f64, edges: &[f64]) -> usize {
    edges.partition_point(|&e| e <= f)
}

/// Bins minima into half-open levels.
pub fn assign_levels(minima: &[MinimumRecord], edges: &[f64]) -> Result<LevelPartition> {
    if minima.is_empty() {
        return Err(Error::Empty("assign_levels"));
    }
    if edges.windows(2).any(|w| w[0] >= w[1]) || edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParameter(
            "level edges must be finite and strictly increasing".into(),
        ));
    }
    Ok(LevelPartition {
        edges: edges.to_vec(),
        level: minima.iter().map(|m| level_of(m.f, edges)).collect(),
        records: minima.to_vec(),
    })
}

/// `bins` equal-width levels over the observed value range.
pub fn equal_width_edges(minima: &[MinimumRecord], bins: usize) -> Vec<f64> {
    let (lo, hi) = minima
        .iter()
        .map(|m| m.f)
        .filter(|f| f.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), f| (lo.min(f), hi.max(f)));
    if bins < 2 || !(hi > lo) {
        return Vec::new();
    }
    let w = (hi - lo) / bins as f64;
    (1..bins).map(|k| lo + w * k as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelDistance {
    pub id: usize,
    pub f: f64,
    /// 0 for the lowest level.
    pub level: usize,
    /// Absent for minima alone in their level.
    pub d_il: Option<f64>,
    pub d_tl: f64,
}

/// Intra- and trans-level distances of every minimum. `best_known` is in
/// unit coordinates.
pub fn level_distances(partition: &LevelPartition, best_known: &[f64]) -> Result<Vec<LevelDistance>> {
    if partition.records.is_empty() {
        return Err(Error::Empty("level_distances"));
    }
    let members: Vec<Vec<usize>> = (0..partition.n_levels()).map(|k| partition.members(k)).collect();
    let recs = &partition.records;
    let mean_to = |i: usize, set: &[usize]| {
        let others: Vec<f64> = set
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| distance(&recs[i].x, &recs[j].x))
            .collect();
        (!others.is_empty()).then(|| others.iter().sum::<f64>() / others.len() as f64)
    };
    Ok((0..recs.len())
        .map(|i| {
            let k = partition.level[i];
            let lower = (0..k).rev().find(|&l| !members[l].is_empty());
            let d_tl = match lower {
                Some(l) => mean_to(i, &members[l]).expect("lower level is occupied"),
                None => distance(&recs[i].x, best_known),
            };
            LevelDistance {
                id: i,
                f: recs[i].f,
                level: k,
                d_il: mean_to(i, &members[k]),
                d_tl,
            }
        })
        .collect())
}

/// Mean `d_il` (over minima that have one) and mean `d_tl` for each level;
/// `None` for empty levels.
pub fn level_means(rows: &[LevelDistance], n_levels: usize) -> Vec<(Option<f64>, Option<f64>)> {
    let mean = |v: Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    (0..n_levels)
        .map(|k| {
            let in_level: Vec<&LevelDistance> = rows.iter().filter(|r| r.level == k).collect();
            (
                mean(in_level.iter().filter_map(|r| r.d_il).collect()),
                mean(in_level.iter().map(|r| r.d_tl).collect()),
            )
        })
        .collect()
}

/// CSV `id,f,level,d_il,d_tl` with 1-based levels and an empty `d_il` for
/// singleton levels.
pub fn distances_csv(rows: &[LevelDistance]) -> String {
    let mut out = String::from("id,f,level,d_il,d_tl\n");
    for r in rows {
        let d_il = r.d_il.map(|d| format!("{d:.9}")).unwrap_or_default();
        let _ = writeln!(out, "{},{:.9e},{},{},{:.9}", r.id, r.f, r.level + 1, d_il, r.d_tl);
    }
    out
}

/// Multistart local search from `n_starts` uniform points; near-duplicate
/// minima are merged.
pub fn harvest_minima(problem: &Problem, n_starts: usize, local: &LocalSearchOptions, seed: u64) -> Result<Archive> {
    if n_starts == 0 {
        return Err(Error::InvalidParameter("at least one start is needed".into()));
    }
    let unit = SearchDomain::unit(problem.dim());
    let records: Result<Vec<MinimumRecord>> = (0..n_starts as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::child(seed, i);
            let x0 = unit.sample(&mut r);
            minimize_local(
                &mut |u: &[f64]| problem.evaluate_unit(u),
                &x0,
                &unit,
                local,
                Origin::Harvest,
            )
        })
        .collect();
    let mut archive = Archive { records: records? };
    archive.dedup(MERGE_DX, MERGE_DF);
    Ok(archive)
}
