//! Budgeted evaluation, per-run reports and archives of local minima.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local::MinimumRecord;
use crate::problems::Problem;

/// Best-so-far value after `evaluations` objective calls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluations: usize,
    pub best_f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartKind {
    /// Population re-inflated around a refined minimum.
    Bubble,
    /// Population or iterate resampled over the whole domain.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartEvent {
    pub evaluations: usize,
    pub kind: RestartKind,
}

/// Counts calls to a problem's unit-cube objective and tracks the best point.
///
/// Non-finite values are returned as they are (callers treat them as
/// rejections) but still charged.
pub struct Evaluator<'a> {
    problem: &'a Problem,
    used: usize,
    budget: usize,
    best_f: f64,
    best_x: Vec<f64>,
    trace: Vec<TracePoint>,
}

impl<'a> Evaluator<'a> {
    pub fn new(problem: &'a Problem, budget: usize) -> Self {
        Self {
            problem,
            used: 0,
            budget,
            best_f: f64::INFINITY,
            best_x: Vec::new(),
            trace: Vec::new(),
        }
    }

    pub fn eval(&mut self, u: &[f64]) -> f64 {
        self.used += 1;
        let f = self.problem.evaluate_unit(u);
        if f < self.best_f {
            self.best_f = f;
            self.best_x = u.to_vec();
            self.trace.push(TracePoint {
                evaluations: self.used,
                best_f: f,
            });
        }
        f
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.used)
    }

    pub fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    pub fn best_f(&self) -> f64 {
        self.best_f
    }

    /// Best unit-cube point seen so far (empty before the first finite value).
    pub fn best_x(&self) -> &[f64] {
        &self.best_x
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    /// Consumes the evaluator into a report skeleton.
    pub fn into_report(self, algorithm: &str, seed: u64, run: u64) -> RunReport {
        let best_x = if self.best_x.is_empty() {
            Vec::new()
        } else {
            self.problem
                .domain
                .denormalize(&self.best_x)
                .expect("best point lies in the unit cube")
        };
        RunReport {
            algorithm: algorithm.to_string(),
            problem: self.problem.name.clone(),
            seed,
            run,
            budget: self.budget,
            evaluations: self.used,
            best_f: self.best_f,
            best_x,
            trace: self.trace,
            restarts: Vec::new(),
            local_searches: 0,
        }
    }
}

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub problem: String,
    pub seed: u64,
    pub run: u64,
    pub budget: usize,
    /// Evaluations actually charged (may exceed `budget` by one local search).
    pub evaluations: usize,
    pub best_f: f64,
    /// Best point in physical units.
    pub best_x: Vec<f64>,
    /// One point per improvement of the best-so-far value.
    pub trace: Vec<TracePoint>,
    pub restarts: Vec<RestartEvent>,
    pub local_searches: usize,
}

impl RunReport {
    /// Best-so-far value after `evaluations` calls (infinite before the first).
    pub fn best_at(&self, evaluations: usize) -> f64 {
        self.trace
            .iter()
            .take_while(|p| p.evaluations <= evaluations)
            .last()
            .map_or(f64::INFINITY, |p| p.best_f)
    }

    /// Trace as CSV with header `evaluations,best_f`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("evaluations,best_f\n");
        for p in &self.trace {
            out.push_str(&format!("{},{:.12e}\n", p.evaluations, p.best_f));
        }
        out
    }
}

/// Local minima collected during one or more runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Archive {
    pub records: Vec<MinimumRecord>,
}

impl Archive {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: MinimumRecord) {
        self.records.push(record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Smallest archived value, `+∞` when empty.
    pub fn f_min(&self) -> f64 {
        self.records.iter().map(|r| r.f).fold(f64::INFINITY, f64::min)
    }

    pub fn extend(&mut self, other: Archive) {
        self.records.extend(other.records);
    }

    /// Merges near-duplicates: records closer than `dx` with values within
    /// `df` collapse onto the first one seen.
    pub fn dedup(&mut self, dx: f64, df: f64) {
        let mut kept: Vec<MinimumRecord> = Vec::with_capacity(self.records.len());
        for r in self.records.drain(..) {
            let dup = kept
                .iter()
                .any(|k| (k.f - r.f).abs() < df && crate::domain::distance(&k.x, &r.x) < dx);
            if !dup {
                kept.push(r);
            }
        }
        self.records = kept;
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut archive = Self::new();
        for (idx, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: MinimumRecord =
                serde_json::from_str(&line).map_err(|e| Error::Parse(format!("archive line {}: {e}", idx + 1)))?;
            archive.push(record);
        }
        Ok(archive)
    }
}
