use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use escape_smoothing::experiment::{self, RunConfig};
use escape_smoothing::report::{emit_report, AssumptionSummary, OutputLock, RunReport};

/// Exit status when a run completes but a validation fails or a row is excluded.
const EXIT_VALIDATION: u8 = 1;
/// Exit status for configuration, numerical or I/O errors.
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "escape-smoothing", version, about = "Classical escape rates versus quantum smoothing constants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep R and compare the classical and quantum constants.
    Correspondence(Common),
    /// Occupation time of B_r against energy.
    Escape(Common),
    /// Wave-packet probes at the configured centers.
    Probe(Common),
    /// Audit the growth and derivative bounds of the potential.
    CheckAssumption(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Override the grid points per axis.
    #[arg(long)]
    grid_n: Option<usize>,
    /// Override the sampler seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(args: &Common) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(n) = args.grid_n {
        cfg.grid.n = n;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(name: &str, out: &Path, cfg: &RunConfig) -> Result<RunReport> {
    let mut report = RunReport::new(name, cfg);
    match name {
        "correspondence" => report.constants = experiment::run_correspondence(cfg, Some(out))?,
        "escape" => report.escape = Some(experiment::run_escape_scaling(cfg)?),
        "probe" => report.probes = Some(experiment::run_probes(cfg)?),
        "check-assumption" => {
            report.assumption = Some(AssumptionSummary::from(&experiment::run_check_assumption(cfg)?));
        }
        _ => unreachable!("unknown subcommand {name}"),
    }
    Ok(report.finalize())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Command::Correspondence(a) => ("correspondence", a),
        Command::Escape(a) => ("escape", a),
        Command::Probe(a) => ("probe", a),
        Command::CheckAssumption(a) => ("check-assumption", a),
    };
    let result = load_config(args).and_then(|cfg| {
        let _lock = OutputLock::acquire(&args.out)?;
        let report = run(name, &args.out, &cfg)?;
        for path in emit_report(&report, &args.out)? {
            log::info!("wrote {}", path.display());
        }
        Ok(report)
    });
    match result {
        Ok(report) if report.pass => ExitCode::SUCCESS,
        Ok(_) => {
            log::error!("{name}: validation failed; see report.json");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
