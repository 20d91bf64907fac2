use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use idea_core::harness::{experiment, required_sample_size, sample_error, stats_csv, Algorithm, Reference};
use idea_core::landscape::{
    assign_levels, distances_csv, equal_width_edges, harvest_minima, level_distances, MERGE_DF, MERGE_DX,
};
use idea_core::local::LocalSearchOptions;
use idea_core::params;
use idea_core::problems::{by_name, Problem};
use idea_core::report::Archive;

use crate::{Command, ProblemArgs, DATA_DIR_ENV};

/// A request the user can fix by changing the command line.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn problem(args: &ProblemArgs) -> Result<Problem> {
    Ok(by_name(&args.problem, args.dim)?)
}

fn algorithm(name: &str, problem: &Problem, file: Option<&Path>) -> Result<Algorithm> {
    let text = match file {
        Some(path) => Some(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?),
        None => None,
    };
    params::resolve(name, problem, text.as_deref()).with_context(|| format!("parameters for {name}"))
}

fn out_dir(out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| std::env::var_os(DATA_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            problem: pa,
            algo,
            budget,
            seed,
            params,
            out,
        } => {
            let p = problem(&pa)?;
            let a = algorithm(&algo, &p, params.as_deref())?;
            let output = a.run(&p, budget as usize, seed, 0)?;
            let dir = out_dir(out);
            let stem = format!("{}-{}-s{seed}", p.name, a.name());
            write_file(
                &dir.join(format!("{stem}.params.toml")),
                params::to_toml(&a)?.as_bytes(),
            )?;
            write_file(
                &dir.join(format!("{stem}.report.json")),
                &serde_json::to_vec_pretty(&output.report)?,
            )?;
            write_file(
                &dir.join(format!("{stem}.trace.csv")),
                output.report.trace_csv().as_bytes(),
            )?;
            let mut archive = Vec::new();
            output.archive.write_jsonl(&mut archive)?;
            write_file(&dir.join(format!("{stem}.archive.jsonl")), &archive)?;
            println!(
                "{} {} best_f={:.9} evaluations={} local_searches={} restarts={}",
                p.name,
                a.name(),
                output.report.best_f,
                output.report.evaluations,
                output.report.local_searches,
                output.report.restarts.len()
            );
            println!("wrote {}/{stem}.*", dir.display());
            Ok(())
        }
        Command::Bench {
            problem: pa,
            algo,
            runs,
            budgets,
            seed,
            reference,
            params,
            out,
            record_time,
            long_run,
        } => {
            let p = problem(&pa)?;
            if !long_run && (runs > 100 || budgets.iter().any(|&b| b > 500_000)) {
                return usage("more than 100 runs or budgets above 500000 need --long-run");
            }
            if budgets.is_empty() || budgets.windows(2).any(|w| w[0] >= w[1]) || budgets[0] == 0 {
                return usage("--budgets must be positive and strictly increasing");
            }
            let reference = match reference.as_str() {
                "best-known" => Reference::BestKnown,
                "best-found" => Reference::BestFound,
                v => match v.parse::<f64>() {
                    Ok(x) => Reference::Value(x),
                    Err(_) => {
                        return usage(format!(
                            "--reference: expected best-known, best-found or a number, got `{v}`"
                        ))
                    }
                },
            };
            let algorithms = algo
                .iter()
                .map(|name| algorithm(name, &p, params.as_deref()))
                .collect::<Result<Vec<_>>>()?;
            let mut e = experiment(&algorithms, &p, &budgets, runs as usize, seed, reference)?;
            if !record_time {
                for s in &mut e.stats {
                    s.wall_seconds = None;
                }
            }
            log::info!("reference value {}", e.f_ref);
            emit(out.as_deref(), &stats_csv(&e.stats))
        }
        Command::Analyze {
            archive,
            problem: pa,
            edges,
            best_known,
            out,
        } => {
            let p = problem(&pa)?;
            if let Some(o) = &out {
                if archive.iter().any(|a| same_file(a, o)) {
                    return usage("--out must not overwrite an input archive");
                }
            }
            let mut merged = Archive::new();
            for path in &archive {
                let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
                merged.extend(Archive::read_jsonl(BufReader::new(f)).with_context(|| path.display().to_string())?);
            }
            merged.dedup(MERGE_DX, MERGE_DF);
            if merged.is_empty() {
                bail!("the merged archive is empty");
            }
            if let Some(r) = merged.records.iter().find(|r| r.x.len() != p.dim()) {
                bail!(
                    "archive record of dimension {} does not match {} ({})",
                    r.x.len(),
                    p.name,
                    p.dim()
                );
            }
            let best = match best_known.or_else(|| p.x_best.clone()) {
                Some(x) if x.len() == p.dim() => p.domain.normalize(&x)?,
                Some(x) => return usage(format!("--best-known has {} components, expected {}", x.len(), p.dim())),
                None => return usage(format!("{} has no best-known point; pass --best-known", p.name)),
            };
            let edges = edges
                .or_else(|| p.level_edges.clone())
                .unwrap_or_else(|| equal_width_edges(&merged.records, 8));
            let partition = assign_levels(&merged.records, &edges)?;
            let rows = level_distances(&partition, &best)?;
            emit(out.as_deref(), &distances_csv(&rows))
        }
        Command::Harvest {
            problem: pa,
            starts,
            seed,
            local_budget,
            out,
        } => {
            let p = problem(&pa)?;
            let local = LocalSearchOptions {
                budget: local_budget.unwrap_or(0),
                ..LocalSearchOptions::default()
            };
            let archive = harvest_minima(&p, starts as usize, &local, seed)?;
            let mut bytes = Vec::new();
            archive.write_jsonl(&mut bytes)?;
            write_file(&out, &bytes)?;
            println!("{} distinct minima, best f = {:.9}", archive.len(), archive.f_min());
            Ok(())
        }
        Command::SampleSize { d_err, alpha } => {
            let n = required_sample_size(d_err, alpha).map_err(|e| Usage(e.to_string()))?;
            println!("n = {n} (error with n runs: {:.6})", sample_error(n, alpha));
            println!("{}", idea_core::harness::SAMPLE_SIZE_NOTE);
            Ok(())
        }
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    }
}
