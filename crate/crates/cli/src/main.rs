use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use bml_cli::certificate::read_certificate;
use bml_cli::mmio::read_matrix_market;
use bml_cli::{run_experiment, ExperimentConfig, Settings};
use bml_core::bml::validate_bml;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bml", version, about = "Orthogonality experiments for Arnoldi variants on BML matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write the per-iteration CSV.
    Run(RunArgs),
    /// Check a certificate against a Matrix Market matrix.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Key-value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Preset name or Matrix Market file.
    #[arg(long)]
    case: Option<String>,
    /// Dimension of a preset.
    #[arg(long)]
    n: Option<usize>,
    /// Certificate file for a Matrix Market case.
    #[arg(long)]
    cert: Option<PathBuf>,
    /// Number of Arnoldi steps; defaults to min(150, n).
    #[arg(long)]
    iters: Option<usize>,
    /// Seed of the preset and the starting vector; defaults to 1.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of arnoldi, arnoldi-reorth, fast, bm, isometric.
    #[arg(long = "method")]
    methods: Option<String>,
    /// Residual shift as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    shift: Option<String>,
    /// CSV output path; standard output if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump |V^*V - I| per method next to the CSV.
    #[arg(long = "log-vv")]
    log_vv: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Matrix Market file.
    #[arg(long)]
    matrix: PathBuf,
    /// Certificate file.
    #[arg(long)]
    cert: PathBuf,
    /// Number of random probe vectors.
    #[arg(long, default_value_t = 5)]
    probes: usize,
    /// Largest accepted relative defect.
    #[arg(long, default_value_t = bml_cli::experiment::CERTIFICATE_CHECK_TOL)]
    tol: f64,
}

fn settings(args: &RunArgs) -> anyhow::Result<Settings> {
    let mut s = match &args.config {
        Some(path) => Settings::read(path)?,
        None => Settings::default(),
    };
    let path_str = |p: &PathBuf| p.display().to_string();
    let overrides = [
        ("case", args.case.clone()),
        ("n", args.n.map(|v| v.to_string())),
        ("cert", args.cert.as_ref().map(path_str)),
        ("iters", args.iters.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("methods", args.methods.clone()),
        ("shift", args.shift.clone()),
        ("out", args.out.as_ref().map(path_str)),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            s.set(key, v);
        }
    }
    if args.log_vv {
        s.set("log_vv", "true");
    }
    Ok(s)
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let config = ExperimentConfig::from_settings(&settings(&args)?)?;
    let record = run_experiment(&config)?;
    match &config.out {
        Some(path) => log::info!("{}: wrote {} rows to {}", record.label, record.rows.len(), path.display()),
        None => print!("{}", record.to_csv()),
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> anyhow::Result<bool> {
    let a = read_matrix_market(&args.matrix)?;
    let op = read_certificate(&args.cert)?
        .into_operator(Arc::new(a))
        .context("building the operator")?;
    let report = validate_bml(&op, args.probes, args.tol)?;
    println!(
        "m1={} m2={} m3={} m={} probes={} max_defect={:.3e} tol={:.1e} {}",
        op.m1(),
        op.m2(),
        op.m3(),
        op.m(),
        report.probes,
        report.max_defect,
        report.tol,
        if report.passed { "PASS" } else { "FAIL" }
    );
    Ok(report.passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let outcome = match Cli::parse().command {
        Command::Run(args) => run(args).map(|_| true),
        Command::Validate(args) => validate(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
