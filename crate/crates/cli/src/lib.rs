//! Command line front end for the `pdmp-core` samplers: simulate one
//! trajectory, compare methods against a closed-form reference, or time
//! repeated realizations.
//!
//! Every run prints a one-line `# key=value ...` provenance header to
//! standard error, and the same line opens every output file. Exit codes:
//! 0 on success, 1 on an engine failure (one diagnostic line naming the
//! error), 2 on a usage error.

pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pdmp_core::{
    builtin_model, chv_simulate, compare_to_oracle, default_bound, example1, example1_oracle, example2,
    example2_oracle, fjm_simulate, histogram, results_to_csv, run_bench, tjm_event_simulate, BenchResult,
    ChvOptions, ExpStream, Histogram, Method, OracleTrajectory, PdmpModel, RateBound, SolverConfig,
    Trajectory,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Engine(_) => 1,
        }
    }
}

fn engine(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "pdmp", version, about = "Exact samplers for piecewise deterministic Markov processes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one trajectory and write it as CSV or JSON.
    Simulate(SimulateArgs),
    /// Compare methods against a closed-form reference on a shared stream.
    Compare(CompareArgs),
    /// Time repeated realizations per method and write histograms.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Registry model: example1, example2, example3, or poisson.
    #[arg(long)]
    pub model: String,
    /// Sampler: chv, fjm, or tjm-event.
    #[arg(long, value_parser = parse_method)]
    pub method: Method,
    /// Physical-time horizon; infinite when only --n-jumps is given.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Stop after this many true jumps.
    #[arg(long)]
    pub n_jumps: Option<u64>,
    /// Stream seed; falls back to the PDMP_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    /// Intensity of the chv flow-sampling clock; 0 disables it.
    #[arg(long, default_value_t = 0.0)]
    pub sample_rate: f64,
    /// Constant thinning bound for fjm; defaults to the registry bound.
    #[arg(long)]
    pub bound: Option<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Example with a closed form: 1 or 2.
    #[arg(long)]
    pub example: u8,
    /// Number of reference draws to follow.
    #[arg(long)]
    pub jumps: u64,
    /// Comma-separated subset of chv, tjm-event.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "chv,tjm-event")]
    pub methods: Vec<Method>,
    /// Stream seed; falls back to the PDMP_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Registry model: example1, example2, example3, or poisson.
    #[arg(long)]
    pub model: String,
    /// Comma-separated subset of chv, fjm, tjm-event.
    #[arg(long, value_delimiter = ',', value_parser = parse_method, default_value = "chv,fjm")]
    pub methods: Vec<Method>,
    /// True jumps computed per realization.
    #[arg(long)]
    pub jumps: u64,
    #[arg(long)]
    pub realizations: u64,
    /// Base seed; realization k derives its own stream from (seed, k).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Histogram bin count over the pooled time range.
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    /// Directory for the per-method result and histogram files.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("PDMP_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("PDMP_SEED must be an unsigned integer, got '{v}'"))),
        Err(_) => Err(usage("no --seed given and PDMP_SEED is not set")),
    }
}

fn lookup_model(name: &str) -> Result<PdmpModel, CliError> {
    builtin_model(name)
        .ok_or_else(|| usage(format!("unknown model '{name}' (expected example1, example2, example3, or poisson)")))
}

fn provenance(model: &str, methods: &[Method], seed: u64, config: &SolverConfig) -> String {
    let list: Vec<&str> = methods.iter().map(|m| m.as_str()).collect();
    format!(
        "# model={model} method={} seed={seed} atol={:e} rtol={:e}",
        list.join(","),
        config.atol,
        config.rtol
    )
}

fn simulate_one(
    model: &PdmpModel,
    method: Method,
    bound: Option<&RateBound>,
    sample_rate: f64,
    t_end: f64,
    max_jumps: u64,
    seed: u64,
    config: &SolverConfig,
) -> Result<Trajectory, CliError> {
    let mut stream = ExpStream::new(seed);
    match method {
        Method::Chv => {
            let opts = ChvOptions { sample_rate, ..ChvOptions::default() };
            chv_simulate(model, t_end, max_jumps, &mut stream, config, &opts).map_err(engine)
        }
        Method::Fjm => {
            let bound = bound.ok_or_else(|| usage(format!("fjm needs --bound for model '{}'", model.id)))?;
            fjm_simulate(model, bound, t_end, max_jumps, u64::MAX, &mut stream, config).map_err(engine)
        }
        Method::TjmEvent => tjm_event_simulate(model, t_end, max_jumps, &mut stream, config).map_err(engine),
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let model = lookup_model(&args.model)?;
    let seed = resolve_seed(args.seed)?;
    if args.t_end.is_none() && args.n_jumps.is_none() {
        return Err(usage("pass --t-end, --n-jumps, or both"));
    }
    let t_end = args.t_end.unwrap_or(f64::INFINITY);
    let max_jumps = args.n_jumps.unwrap_or(u64::MAX);
    let config = SolverConfig::with_tolerances(args.atol, args.rtol);
    let header = provenance(&args.model, &[args.method], seed, &config);
    eprintln!("{header}");
    let bound = args.bound.map(RateBound::Constant).or_else(|| default_bound(&args.model));
    let traj = simulate_one(
        &model,
        args.method,
        bound.as_ref(),
        args.sample_rate,
        t_end,
        max_jumps,
        seed,
        &config,
    )?;
    let body = match args.format {
        Format::Csv => output::trajectory_csv(&traj, &header),
        Format::Json => output::trajectory_json(&traj, &header).map_err(engine)?,
    };
    output::emit(args.out.as_deref(), &body).map_err(engine)
}

fn oracle_for(example: u8, seed: u64, jumps: u64) -> OracleTrajectory {
    let mut stream = ExpStream::new(seed);
    if example == 1 {
        example1_oracle(&mut stream, jumps)
    } else {
        example2_oracle(&mut stream, jumps)
    }
}

fn cmd_compare(args: CompareArgs) -> Result<(), CliError> {
    if args.example != 1 && args.example != 2 {
        return Err(usage(format!(
            "--example must be 1 or 2, got {} (only those have closed forms)",
            args.example
        )));
    }
    if args.methods.is_empty() {
        return Err(usage("pass at least one method"));
    }
    if args.methods.contains(&Method::Fjm) {
        return Err(usage("compare needs shared-stream methods: chv, tjm-event"));
    }
    let seed = resolve_seed(args.seed)?;
    let config = SolverConfig::with_tolerances(args.atol, args.rtol);
    let model = if args.example == 1 { example1() } else { example2() };
    let oracle = oracle_for(args.example, seed, args.jumps);
    let reachable = oracle.jumps.len() as u64;
    let header = provenance(&model.id, &args.methods, seed, &config);
    eprintln!("{header}");
    let mut tables = Vec::new();
    for &method in &args.methods {
        let traj = simulate_one(&model, method, None, 0.0, f64::INFINITY, reachable, seed, &config)?;
        tables.push(compare_to_oracle(&traj, &oracle, &config).map_err(engine)?);
    }
    let body = output::error_tables_csv(&tables, &header);
    output::emit(args.out.as_deref(), &body).map_err(engine)
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let model = lookup_model(&args.model)?;
    if args.methods.is_empty() {
        return Err(usage("pass at least one method"));
    }
    if args.jumps == 0 {
        return Err(usage("--jumps must be at least 1"));
    }
    if args.realizations == 0 {
        return Err(usage("--realizations must be at least 1"));
    }
    if args.bins < 2 {
        return Err(usage(format!("--bins must be at least 2, got {}", args.bins)));
    }
    let seed = resolve_seed(args.seed)?;
    let config = SolverConfig::with_tolerances(args.atol, args.rtol);
    eprintln!("{}", provenance(&args.model, &args.methods, seed, &config));
    let report = run_bench(&model, &args.methods, args.jumps, args.realizations, seed, &config, None)
        .map_err(engine)?;
    for f in &report.failures {
        eprintln!("warning: {} realization {} failed: {}", f.method, f.realization, f.error);
    }
    if report.results.is_empty() {
        return Err(CliError::Engine("EmptyResults: every realization failed".into()));
    }
    let hist = histogram(&report.results, args.bins).map_err(engine)?;
    std::fs::create_dir_all(&args.out_dir).map_err(engine)?;
    for &method in &args.methods {
        let rows: Vec<BenchResult> =
            report.results.iter().filter(|r| r.method == method).cloned().collect();
        if rows.is_empty() {
            continue;
        }
        let file_header = provenance(&args.model, &[method], seed, &config);
        let mut body = format!("{file_header}\n");
        body.push_str(&results_to_csv(&rows));
        let res_path = args.out_dir.join(format!("bench_{}.csv", method.as_str()));
        std::fs::write(&res_path, body).map_err(engine)?;

        let single = Histogram {
            edges: hist.edges.clone(),
            counts: hist.counts.iter().filter(|(m, _)| *m == method).cloned().collect(),
        };
        let hist_path = args.out_dir.join(format!("hist_{}.csv", method.as_str()));
        std::fs::write(&hist_path, format!("{file_header}\n{}", single.to_csv())).map_err(engine)?;
    }
    Ok(())
}
