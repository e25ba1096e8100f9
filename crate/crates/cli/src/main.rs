//! `flashlab` command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on runtime failures
//! (state cap, non-convergence, I/O, failed verification).

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use flashlab::markov::{self, build_chain, stationary, write_chain_dump, DEFAULT_TRANSITION_CAP};
use flashlab::sim::{self, RunConfig, RunStats, RunSummary};
use flashlab::verify::{self, replay};
use flashlab::{CodeKind, CodeParams, Exact, FlashError, FlipDistribution, Scalar};
use serde::Serialize;

/// Probabilities given on the command line must sum to one within this.
const P_SUM_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(
    name = "flashlab",
    version,
    about = "Index-less indexed flash codes: simulation, Markov analysis, verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo rewriting simulation: histogram CSV and stats JSON.
    Simulate(SimulateArgs),
    /// Exact average performance from the reachable-state Markov chain.
    Markov(MarkovArgs),
    /// Rate vs. average rewrites for both codes over several block lengths.
    Sweep(SweepArgs),
    /// Adversarial minimum number of writes before the first erase.
    Worstcase(WorstcaseArgs),
    /// Run every brute-force check for one geometry.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct Geometry {
    /// Cells per erase block.
    #[arg(long)]
    n: usize,
    /// Information bits (even).
    #[arg(long)]
    k: usize,
    /// Cell levels.
    #[arg(long)]
    q: usize,
}

impl Geometry {
    fn params(&self) -> Result<CodeParams, CliError> {
        Ok(CodeParams::new(self.n, self.k, self.q)?)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    geometry: Geometry,
    #[arg(long, default_value = "layered")]
    code: CodeKind,
    /// `uniform` or a comma-separated list of k probabilities.
    #[arg(long, default_value = "uniform")]
    p: String,
    /// Erase operations to simulate.
    #[arg(long, default_value_t = 10_000)]
    erases: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Independent replicas, seeded from `--seed` and the replica number.
    #[arg(long, default_value_t = 1)]
    runs: u64,
    /// Histogram CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stats JSON output (stdout when omitted).
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MarkovArgs {
    #[command(flatten)]
    geometry: Geometry,
    #[arg(long, default_value = "layered")]
    code: CodeKind,
    #[arg(long, default_value = "uniform")]
    p: String,
    /// Stationary residual tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Maximum number of chain transitions.
    #[arg(long, default_value_t = DEFAULT_TRANSITION_CAP)]
    cap: usize,
    /// Also solve with exact rational arithmetic.
    #[arg(long)]
    exact: bool,
    /// Write the transition list (`from,to,bit,prob,erase`) here.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// JSON output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    q: usize,
    /// Comma-separated block lengths.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value = "uniform")]
    p: String,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_TRANSITION_CAP)]
    cap: usize,
    /// CSV output (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct WorstcaseArgs {
    #[command(flatten)]
    geometry: Geometry,
    #[arg(long, default_value = "layered")]
    code: CodeKind,
    /// Maximum number of states to visit.
    #[arg(long, default_value_t = 5_000_000)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    geometry: Geometry,
    /// Length of the exhaustively enumerated flip sequences.
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[arg(long, default_value_t = 5_000_000)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<FlashError> for CliError {
    fn from(e: FlashError) -> Self {
        match e {
            FlashError::InvalidParams(_)
            | FlashError::InvalidDistribution(_)
            | FlashError::BitOutOfRange { .. }
            | FlashError::InvalidState(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn parse_dist<T: Scalar>(text: &str, k: usize, tol: T) -> Result<FlipDistribution<T>, CliError> {
    Ok(FlipDistribution::parse(text, k, &tol)?)
}

/// Opens `path` for writing, or stdout.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Runtime(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Runtime(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let params = args.geometry.params()?;
    if args.erases == 0 || args.runs == 0 {
        return Err(CliError::Usage("--erases and --runs must be >= 1".into()));
    }
    let cfg = RunConfig {
        params,
        code: args.code,
        dist: parse_dist(&args.p, params.k(), P_SUM_TOL)?,
        stop: args.erases,
        seed: args.seed,
    };
    let stats = if args.runs == 1 {
        sim::run(&cfg)?
    } else {
        RunStats::merge(sim::run_batch(&cfg, args.runs)?)
    };
    if let Some(path) = &args.out {
        let mut out = sink(Some(path))?;
        sim::write_histogram_csv(&stats, &mut out)?;
        out.flush()?;
    }
    let mut summary = RunSummary::new(&cfg, &stats)?;
    summary.erases = stats.erases();
    write_json(&summary, args.stats.as_deref())
}

#[derive(Serialize)]
struct MarkovReport {
    params: CodeParams,
    code: CodeKind,
    probabilities: Vec<f64>,
    states: usize,
    transitions: usize,
    erase_probability: f64,
    step_erase_probability: f64,
    avg_rewritings: f64,
    residual: f64,
    method: markov::SolveMethod,
    iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactReport>,
}

#[derive(Serialize)]
struct ExactReport {
    erase_probability: String,
    avg_rewritings: String,
}

fn markov_cmd(args: &MarkovArgs) -> Result<(), CliError> {
    let params = args.geometry.params()?;
    let code = args.code.codec(params);
    let dist = parse_dist(&args.p, params.k(), P_SUM_TOL)?;
    let chain = build_chain(&code, &dist, args.cap)?;
    if let Some(path) = &args.dump {
        let mut out = sink(Some(path))?;
        write_chain_dump(&chain, &mut out)?;
        out.flush()?;
    }
    let r = stationary(&chain, &args.tol, args.max_iter)?;
    let exact = if args.exact {
        let dist = parse_dist(&args.p, params.k(), Exact::from_ratio(0, 1))?;
        let chain = build_chain(&code, &dist, args.cap)?;
        let e = stationary(&chain, &Exact::from_ratio(0, 1), 0)?;
        Some(ExactReport {
            erase_probability: e.erase_probability.to_string(),
            avg_rewritings: e.avg_rewritings.to_string(),
        })
    } else {
        None
    };
    let report = MarkovReport {
        params,
        code: args.code,
        probabilities: dist.probs().to_vec(),
        states: chain.len(),
        transitions: chain.transitions().len(),
        erase_probability: r.erase_probability,
        step_erase_probability: r.step_erase_probability,
        avg_rewritings: r.avg_rewritings,
        residual: r.residual,
        method: r.method,
        iterations: r.iterations,
        exact,
    };
    write_json(&report, args.out.as_deref())
}

fn sweep(args: &SweepArgs) -> Result<(), CliError> {
    let dist = parse_dist(&args.p, args.k, P_SUM_TOL)?;
    let rows = markov::sweep_tradeoff(args.k, args.q, &args.n, &dist, args.tol, args.cap)?;
    let mut out = sink(args.out.as_deref())?;
    markov::write_sweep_csv(&rows, &mut out)?;
    out.flush()?;
    Ok(())
}

fn worstcase(args: &WorstcaseArgs) -> Result<(), CliError> {
    let params = args.geometry.params()?;
    let w = verify::worst_case(args.code, params, args.cap)?;
    let r = replay(&args.code.codec(params), &w.witness)?;
    if r.writes != w.min_writes || r.erased_at != Some(w.witness.len() - 1) {
        return Err(CliError::Runtime(format!("witness replay mismatch: {r:?}")));
    }
    write_json(&w, args.out.as_deref())
}

fn verify_cmd(args: &VerifyArgs) -> Result<(), CliError> {
    let params = args.geometry.params()?;
    let report = verify::verify_all(params, args.depth, args.cap)?;
    write_json(&report, args.out.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Runtime("verification failed".into()))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("FLASHLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("FLASHLAB_THREADS={value:?} is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Markov(a) => markov_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Worstcase(a) => worstcase(a),
        Command::Verify(a) => verify_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("flashlab: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 1,
                CliError::Runtime(_) => 2,
            })
        }
    }
}
