use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use idea_core::error::Error as CoreError;

mod commands;

/// Default directory for run outputs and archives.
pub const DATA_DIR_ENV: &str = "IDEA_DATA_DIR";

const SAMPLE_SIZE_HELP: &str = "Runs needed to estimate a success rate within d_err at confidence 1 - alpha.\n\n\
The formula n = ceil(0.25 chi2_(1),alpha / d_err^2) gives 385 runs for d_err = 0.05, alpha = 0.05 \
and 97 for d_err = 0.1. Often-quoted figures are n = 175 and an error of 0.020857 for 1000 runs; \
neither follows from the formula (which gives 0.031 for 1000 runs). The formula is implemented as written.";

#[derive(Parser)]
#[command(
    name = "idea",
    version,
    about = "Inflationary differential evolution, basin hopping and trajectory benchmarks"
)]
struct Cli {
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Problem name (paraboloid, rastrigin, schwefel, cassini1, cassini2, rosetta, messenger).
    #[arg(long)]
    problem: String,
    /// Dimension of the analytic problems.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// One optimizer run: writes the report, trace, archive and resolved parameters.
    Run {
        #[command(flatten)]
        problem: ProblemArgs,
        /// idea, de, mbh or mbh-gr.
        #[arg(long, default_value = "idea")]
        algo: String,
        /// Objective evaluations.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// TOML parameter file.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output directory [default: $IDEA_DATA_DIR or ./results].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Success rates over repeated runs and increasing budgets.
    Bench {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated algorithm names; all share one reference value.
        #[arg(long, value_delimiter = ',', default_value = "idea")]
        algo: Vec<String>,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        runs: u64,
        /// Comma-separated, strictly increasing budgets.
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// best-known, best-found (best over all runs of this command) or a number.
        #[arg(long, default_value = "best-known")]
        reference: String,
        #[arg(long)]
        params: Option<PathBuf>,
        /// CSV output file [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Fill the wall_seconds column (makes the CSV time-dependent).
        #[arg(long)]
        record_time: bool,
        /// Allow more than 100 runs or budgets above 500000.
        #[arg(long)]
        long_run: bool,
    },
    /// Level distances of archived minima.
    Analyze {
        /// Archive files (JSON lines) to merge.
        #[arg(long, num_args = 1.., required = true)]
        archive: Vec<PathBuf>,
        /// Problem whose domain the archives belong to.
        #[command(flatten)]
        problem: ProblemArgs,
        /// Comma-separated interior level edges [default: per problem, else 8 equal-width levels].
        #[arg(long, value_delimiter = ',')]
        edges: Option<Vec<f64>>,
        /// Comma-separated best-known point in physical units [default: the problem's].
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        best_known: Option<Vec<f64>>,
        /// CSV output file [default: stdout].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multistart local search; writes the merged minima as an archive.
    Harvest {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        starts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluations per local search [default: 500 d].
        #[arg(long)]
        local_budget: Option<usize>,
        /// Archive output file.
        #[arg(long)]
        out: PathBuf,
    },
    #[command(about = "Runs needed for a success-rate estimate", long_about = SAMPLE_SIZE_HELP)]
    SampleSize {
        #[arg(long)]
        d_err: f64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::UnknownProblem(_) | CoreError::UnknownAlgorithm(_)) => 2,
        _ => match err.downcast_ref::<commands::Usage>() {
            Some(_) => 2,
            None => 3,
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = (|| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(j) = cli.jobs {
            pool = pool.num_threads(j.max(1));
        }
        pool.build()?.install(|| commands::dispatch(cli.command))
    })();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
