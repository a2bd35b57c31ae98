//! `unicache`: run cache-model experiments, compare result tables and
//! replay request traces.
//!
//! Exit codes: 0 on success, 1 when an engine fails or a comparison is out
//! of tolerance, 2 for unreadable or invalid input.

mod compare;
mod run;
mod scenario;
mod table;

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use unicache::analytic::{Policy, PolicySpec};
use unicache::sim::{replay_trace, SimConfig, Trace};

use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "unicache", version, about = "Cache hit-ratio models and simulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file and write its results as CSV.
    Run {
        config: PathBuf,
        /// Output file (default: the scenario's `output`, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: one per core).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare the hit ratios of two result tables.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Largest accepted absolute difference.
        #[arg(long)]
        tol: f64,
    },
    /// Replay a `timestamp<TAB>object_id` trace through one cache.
    Trace {
        trace: PathBuf,
        #[arg(long)]
        policy: Policy,
        #[arg(long)]
        capacity: usize,
        /// Fraction of requests used to warm the cache up.
        #[arg(long, default_value_t = 0.25)]
        warmup: f64,
        #[arg(long, default_value_t = 20)]
        batches: usize,
        /// Seed for the policy's own random choices.
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// An error together with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn engine(error: anyhow::Error) -> Failure {
    Failure { code: 1, error }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, threads } => cmd_run(&config, out, threads),
        Command::Compare { a, b, tol } => cmd_compare(&a, &b, tol),
        Command::Trace {
            trace,
            policy,
            capacity,
            warmup,
            batches,
            seed,
        } => cmd_trace(&trace, policy, capacity, warmup, batches, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error:#}");
            ExitCode::from(code)
        }
    }
}

fn cmd_run(config: &Path, out: Option<PathBuf>, threads: Option<usize>) -> Result<(), Failure> {
    let scenario = Scenario::load(config)
        .with_context(|| format!("invalid scenario {}", config.display()))
        .map_err(input)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(input(anyhow::anyhow!("--threads must be at least 1")));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("cannot start the worker pool").map_err(engine)?;
    let rows = pool.install(|| run::run_scenario(&scenario)).map_err(engine)?;
    match out.or(scenario.output) {
        // Written through a temporary file so that a failure never leaves
        // a partial table behind.
        Some(path) => write_atomically(&path, |w| table::write_rows(w, &rows)),
        None => table::write_rows(io::stdout().lock(), &rows),
    }
    .map_err(engine)
}

fn write_atomically(path: &Path, write: impl FnOnce(&mut File) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut file = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a file in {}", dir.display()))?;
    write(file.as_file_mut())?;
    file.as_file_mut().flush()?;
    file.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn read_table(path: &Path) -> Result<Vec<table::Row>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    table::read_rows(BufReader::new(file)).with_context(|| format!("invalid table {}", path.display()))
}

fn cmd_compare(a: &Path, b: &Path, tol: f64) -> Result<(), Failure> {
    let (ra, rb) = (read_table(a).map_err(input)?, read_table(b).map_err(input)?);
    let comparison = compare::compare(&ra, &rb, tol).map_err(input)?;
    print!("{}", comparison.report());
    if comparison.passed() {
        Ok(())
    } else {
        Err(engine(anyhow::anyhow!(
            "max |diff| {:e} exceeds tolerance {tol:e}",
            comparison.max_diff()
        )))
    }
}

fn cmd_trace(path: &Path, policy: Policy, capacity: usize, warmup: f64, batches: usize, seed: u64) -> Result<(), Failure> {
    let spec = PolicySpec::new(policy, capacity).map_err(|e| input(e.into()))?;
    let trace = Trace::from_path(path)
        .with_context(|| format!("cannot load trace {}", path.display()))
        .map_err(input)?;
    let config = SimConfig {
        warmup_fraction: warmup,
        batches,
        seed,
        ..SimConfig::default()
    };
    let report = replay_trace(&spec, &trace, &config).map_err(|e| input(e.into()))?;
    let ci = report.hit_estimate().half_width(0.95);
    let mut out = io::stdout().lock();
    let result: io::Result<()> = (|| {
        writeln!(out, "policy,C,requests,objects,measured,hit_total,hit_ci")?;
        writeln!(
            out,
            "{policy},{capacity},{},{},{},{},{}",
            trace.len(),
            trace.object_count(),
            report.measured_requests,
            report.aggregate_hit(),
            if ci.is_finite() { ci.to_string() } else { String::new() }
        )
    })();
    result.context("cannot write output").map_err(engine)
}
