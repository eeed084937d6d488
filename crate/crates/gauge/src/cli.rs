//! The `tgauge` command line.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 file or format error,
//! 4 solver stopped before convergence, 5 separation search inconclusive.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gauge_core::bcg::{gradient, solve_with_clock, SolveStatus, SolverConfig};
use gauge_core::dense::materialize_dense;
use gauge_core::separation::{
    export_milp, weak_separation_oracle, CertificateMode, OracleConfig, SeparationRequest, SeparationResult,
};
use gauge_core::{Clock, NoClock, Shape};

use crate::experiments::{self, generate_truth, nmse, run_benchmark, sample_observations, BenchOptions};
use crate::io::{self, format_significant, IoError};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "tgauge", version, about = "Gauge-norm tensor completion")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for benchmarks.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Progress on standard error; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Write 0 for every wall-clock field so outputs depend only on inputs.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a ground-truth model and noisy samples from it.
    Gen(GenArgs),
    /// Fit a model to samples.
    Solve(SolveArgs),
    /// NMSE of a model against a reference model.
    Eval(EvalArgs),
    /// Query the separation oracle at a model's gradient, or export it.
    Oracle(OracleArgs),
    /// Run a replicated benchmark.
    Bench(BenchArgs),
}

fn parse_shape(s: &str) -> Result<Shape, String> {
    let dims = s
        .split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|_| format!("{d:?} is not a mode size")))
        .collect::<Result<Vec<_>, _>>()?;
    Shape::new(dims).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Mode sizes, e.g. 5,5,5.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Shape,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub terms: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value = "truth.json")]
    pub truth_out: PathBuf,
    #[arg(long, default_value = "samples.csv")]
    pub samples_out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Certificate {
    Optimum,
    Threshold,
}

impl From<Certificate> for CertificateMode {
    fn from(c: Certificate) -> Self {
        match c {
            Certificate::Optimum => CertificateMode::Optimum,
            Certificate::Threshold => CertificateMode::Threshold,
        }
    }
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Oracle accuracy K.
    #[arg(long = "k", default_value_t = 2.0)]
    pub accuracy: f64,
    /// Random alternating-maximization starts per oracle call.
    #[arg(long, default_value_t = 5)]
    pub am_restarts: usize,
    #[arg(long, default_value_t = gauge_core::separation::DEFAULT_PASS_CAP)]
    pub am_pass_cap: usize,
    /// Branch-and-bound node budget per exact search (unlimited if absent).
    #[arg(long)]
    pub node_budget: Option<u64>,
    #[arg(long, value_enum, default_value_t = Certificate::Optimum)]
    pub certificate: Certificate,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub samples: PathBuf,
    /// Mode sizes; inferred from the largest coordinates when absent.
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<Shape>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: usize,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value = "model.json")]
    pub model_out: PathBuf,
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    #[arg(long)]
    pub metrics_out: Option<PathBuf>,
    /// Also compute the NMSE from materialized dense tensors.
    #[arg(long)]
    pub check_dense: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Solve,
    Export,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub samples: PathBuf,
    /// Current iterate; its shape and λ define the request.
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub phi: f64,
    #[arg(long, value_enum, default_value_t = OracleMode::Solve)]
    pub mode: OracleMode,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Destination of the exported program (standard output if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Core(#[from] gauge_core::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(IoError::Core(e)) | CliError::Core(e) => core_code(e),
            CliError::Io(_) => EXIT_IO,
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

fn core_code(e: &gauge_core::Error) -> i32 {
    match e {
        gauge_core::Error::OracleInconclusive { .. } => EXIT_INCONCLUSIVE,
        _ => EXIT_USAGE,
    }
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

/// Parses `args` (program name first) and runs the command. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Gen(a) => cmd_gen(cli, a),
        Command::Solve(a) => cmd_solve(cli, a),
        Command::Eval(a) => cmd_eval(a),
        Command::Oracle(a) => cmd_oracle(cli, a),
        Command::Bench(a) => cmd_bench(cli, a),
    }
}

fn check_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(CliError::Io(IoError::File {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "parent directory does not exist"),
        })),
        _ => Ok(()),
    }
}

fn cmd_gen(cli: &Cli, a: &GenArgs) -> Result<i32, CliError> {
    check_parent(&a.truth_out)?;
    check_parent(&a.samples_out)?;
    let truth = generate_truth(&a.shape, a.terms as usize, cli.seed)?;
    let samples = sample_observations(&truth, a.n as usize, a.noise, experiments::stream(cli.seed, 1))?;
    io::write_text(&a.truth_out, &io::format_model(&truth))?;
    io::write_text(&a.samples_out, &io::format_samples(&samples))?;
    if cli.verbose > 0 {
        eprintln!("shape {} terms {} n {} unique {}", a.shape, a.terms, samples.n(), samples.unique().len());
    }
    Ok(0)
}

fn cmd_solve(cli: &Cli, a: &SolveArgs) -> Result<i32, CliError> {
    check_parent(&a.model_out)?;
    if let Some(p) = &a.trace_out {
        check_parent(p)?;
    }
    let samples = io::read_samples(&a.samples, a.shape.as_ref())?;
    let cfg = SolverConfig {
        lambda: a.lambda,
        epsilon: a.epsilon,
        accuracy: a.search.accuracy,
        max_iterations: a.max_iterations,
        am_restarts: a.search.am_restarts,
        am_pass_cap: a.search.am_pass_cap,
        bnb_node_budget: a.search.node_budget,
        seed: cli.seed,
        certificate: a.search.certificate.into(),
    };
    let wall = WallClock(Instant::now());
    let clock: &dyn Clock = if cli.no_timing { &NoClock } else { &wall };
    let out = solve_with_clock(&samples, &cfg, clock)?;
    io::write_text(&a.model_out, &io::format_model(&out.model))?;
    if let Some(p) = &a.trace_out {
        io::write_text(p, &io::format_trace(&out.diagnostics.trace))?;
    }
    let d = &out.diagnostics;
    if cli.verbose > 0 {
        for r in &d.trace {
            eprintln!(
                "{:>6} {:<6} objective {:.6e} phi {:.3e} active {}",
                r.iteration,
                r.phase.as_str(),
                r.objective,
                r.phi,
                r.active_size
            );
        }
    }
    let (label, code) = match out.status {
        SolveStatus::Converged => ("converged", 0),
        SolveStatus::MaxIterations => ("not-converged", EXIT_NOT_CONVERGED),
        SolveStatus::Aborted => ("aborted", EXIT_INCONCLUSIVE),
    };
    println!(
        "status {label} iterations {} oracle_calls {} phi {} objective {} terms {}",
        d.iterations,
        d.oracle_calls,
        format_significant(out.state.phi(), 6),
        format_significant(out.state.objective(), 6),
        out.model.terms().len()
    );
    Ok(code)
}

fn cmd_eval(a: &EvalArgs) -> Result<i32, CliError> {
    if let Some(p) = &a.metrics_out {
        check_parent(p)?;
    }
    let model = io::read_model(&a.model)?;
    let truth = io::read_model(&a.truth)?;
    if model.shape() != truth.shape() {
        return Err(CliError::Usage(format!("shape mismatch: model {} vs truth {}", model.shape(), truth.shape())));
    }
    let value = nmse(&model, &truth)?;
    println!("{}", format_significant(value, 12));
    let mut dense_field = String::new();
    if a.check_dense {
        let s = truth.shape();
        let dm = materialize_dense(s, |x| model.entry(x), None)?;
        let dt = materialize_dense(s, |x| truth.entry(x), None)?;
        let num: f64 = dm.iter().zip(&dt).map(|(p, q)| (p - q) * (p - q)).sum();
        let den: f64 = dt.iter().map(|q| q * q).sum();
        let dense = num / den;
        println!("dense {}", format_significant(dense, 12));
        dense_field = format!("{dense:?}");
    }
    if let Some(p) = &a.metrics_out {
        io::write_text(p, &format!("nmse,nmse_dense\n{value:?},{dense_field}\n"))?;
    }
    Ok(0)
}

fn cmd_oracle(cli: &Cli, a: &OracleArgs) -> Result<i32, CliError> {
    if let Some(p) = &a.out {
        check_parent(p)?;
    }
    let model = io::read_model(&a.model)?;
    let samples = io::read_samples(&a.samples, Some(model.shape()))?;
    let psi: Vec<f64> = samples.unique().iter().map(|x| model.entry(x)).collect();
    let g = gradient(&psi, &samples);
    let req = SeparationRequest::new(
        model.shape().clone(),
        model.lambda(),
        samples.unique().to_vec(),
        g,
        psi,
        a.phi,
        a.search.accuracy,
    )?;
    match a.mode {
        OracleMode::Export => {
            let text = export_milp(&req);
            match &a.out {
                Some(p) => io::write_text(p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        OracleMode::Solve => {
            let cfg = OracleConfig {
                restarts: a.search.am_restarts,
                pass_cap: a.search.am_pass_cap,
                node_budget: a.search.node_budget,
                seed: cli.seed,
                certificate: a.search.certificate.into(),
            };
            let report = weak_separation_oracle(&req, &cfg, None)?;
            match report.result {
                SeparationResult::Separated { vertex, gap } => {
                    println!("Separated gap {}", format_significant(gap, 12));
                    println!("{}", serde_json::to_string(vertex.signs()).expect("signs serialize"));
                }
                SeparationResult::NoSeparation { certified_bound } => {
                    println!("NoSeparation bound {}", format_significant(certified_bound, 12));
                }
            }
            if cli.verbose > 0 {
                eprintln!("resolution {:?} nodes {}", report.resolution, report.nodes);
            }
            Ok(0)
        }
    }
}

fn cmd_bench(cli: &Cli, a: &BenchArgs) -> Result<i32, CliError> {
    let spec = io::read_bench_spec(&a.spec)?;
    if !a.out_dir.is_dir() {
        std::fs::create_dir_all(&a.out_dir)
            .map_err(|source| IoError::File { path: a.out_dir.clone(), source })?;
    }
    let opts = BenchOptions { threads: cli.threads, timing: !cli.no_timing };
    let report = run_benchmark(&spec, &opts)?;
    io::write_text(&a.out_dir.join("trials.csv"), &io::format_trials(&report.trials))?;
    let agg = io::format_aggregates(&report.aggregates);
    io::write_text(&a.out_dir.join("aggregates.csv"), &agg)?;
    print!("{agg}");
    Ok(0)
}
