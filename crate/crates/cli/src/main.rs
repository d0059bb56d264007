//! `headtwin`: config-driven runner for the simulated binaural beamforming experiment.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use headtwin_core::pipeline::{
    beamform_stage, evaluate_stage, find_scenarios, parallel_map, run_experiment, simulate_stage, sweep_report,
    ExperimentConfig,
};
use headtwin_core::Error;

#[derive(Parser)]
#[command(name = "headtwin", version, about = "Simulated moving-talker binaural MVDR experiment")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render noise-only, target takes and natural mixture for every speed.
    Simulate(ExperimentArgs),
    /// Mix and run MVDR + covariance whitening on simulated scenarios.
    Beamform(StageArgs),
    /// Compute SNR gain, NMSE, repeatability and RTF error.
    Evaluate(StageArgs),
    /// Simulate, beamform, evaluate and write the sweep report.
    Run(ExperimentArgs),
    /// Join the SNR-gain curves of completed scenarios.
    SweepReport(ReportArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output root, overriding `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed, overriding `scene.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated speeds in rev/s, overriding `speeds_rev_s`.
    #[arg(long)]
    speeds: Option<String>,
    /// Replace existing scenario directories.
    #[arg(long)]
    overwrite: bool,
    /// Scenarios processed in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct StageArgs {
    /// Output root holding scenario directories, or a single scenario directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    out: PathBuf,
    /// Report path; defaults to `<out>/sweep_report.csv`.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Failures split by exit code.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

fn parse_speeds(list: &str) -> anyhow::Result<Vec<f64>> {
    list.split(',')
        .map(|s| {
            let s = s.trim();
            s.parse::<f64>().with_context(|| format!("--speeds: '{s}' is not a number"))
        })
        .collect()
}

fn load_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| Failure::Config(e.into()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.scene.master_seed = seed;
    }
    if let Some(list) = &args.speeds {
        cfg.speeds_rev_s = parse_speeds(list).map_err(Failure::Config)?;
    }
    if args.jobs == 0 {
        return Err(Failure::Config(anyhow!("--jobs must be at least 1")));
    }
    cfg.validate().map_err(|e| Failure::Config(e.into()))?;
    Ok(cfg)
}

fn print_summary(dir: &Path, eval: &headtwin_core::pipeline::EvaluationRecord) {
    let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2} dB"));
    println!(
        "{}: mean gain {}, >2 kHz {}, nmse {:.2} dB, median RTF error {:.3}",
        dir.display(),
        fmt(eval.mean_gain_db),
        fmt(eval.mean_gain_above_2khz_db),
        eval.nmse_db,
        eval.median_rtf_error
    );
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = load_config(&args)?;
            let dirs = parallel_map(&cfg.speeds_rev_s, args.jobs, |&speed| {
                simulate_stage(&cfg, speed, &cfg.output_dir, args.overwrite)
            })?;
            for d in dirs {
                println!("{}", d.display());
            }
        }
        Command::Beamform(args) => {
            let dirs = find_scenarios(&args.out)?;
            parallel_map(&dirs, args.jobs.max(1), |d| beamform_stage(d))?;
            for d in dirs {
                println!("{}", d.display());
            }
        }
        Command::Evaluate(args) => {
            let dirs = find_scenarios(&args.out)?;
            let evals = parallel_map(&dirs, args.jobs.max(1), |d| evaluate_stage(d))?;
            for (d, e) in dirs.iter().zip(&evals) {
                print_summary(d, e);
            }
        }
        Command::Run(args) => {
            let cfg = load_config(&args)?;
            let dirs = run_experiment(&cfg, &cfg.output_dir, args.overwrite, args.jobs)?;
            for d in &dirs {
                let manifest = d.join("evaluation.json");
                let text = std::fs::read_to_string(&manifest)
                    .with_context(|| manifest.display().to_string())
                    .map_err(Failure::Runtime)?;
                let eval = serde_json::from_str(&text).map_err(|e| Failure::Runtime(e.into()))?;
                print_summary(d, &eval);
            }
        }
        Command::SweepReport(args) => {
            let dirs = find_scenarios(&args.out)?;
            let report = args.report.unwrap_or_else(|| args.out.join("sweep_report.csv"));
            let summary = sweep_report(&dirs, &report)?;
            println!("{}", serde_json::to_string_pretty(&summary).map_err(|e| Failure::Runtime(e.into()))?);
        }
    }
    Ok(())
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
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
