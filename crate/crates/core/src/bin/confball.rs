use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use confball::harness::{
    self, check_selfsim, coverage_csv, diameter_csv, lepski_csv, run_coverage, run_diameter_scaling, run_lepski_diag,
    run_lowerbound_demo, to_json, ExperimentConfig, HarnessError, RunOptions,
};

#[derive(Parser)]
#[command(name = "confball", version, about = "Adaptive l2 confidence balls in the Gaussian sequence model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Run even if the truth fails the self-similarity gate.
    #[arg(long, global = true)]
    allow_nonselfsim: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Coverage,
    Diameter,
    LepskiDiag,
    Lowerbound,
    CheckSelfsim,
    MakeTruth,
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), HarnessError> {
    std::fs::write(dir.join(name), body)?;
    Ok(())
}

#[derive(serde::Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    files: Vec<harness::ManifestEntry>,
}

#[derive(serde::Serialize)]
struct Summary<'a, T> {
    config: &'a ExperimentConfig,
    #[serde(flatten)]
    result: &'a T,
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let path = cli.config.as_deref().ok_or_else(|| HarnessError::Config("--config is required".into()))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    if cli.threads == Some(0) {
        return Err(HarnessError::Config("--threads must be >= 1".into()));
    }
    let opts = RunOptions { allow_nonselfsim: cli.allow_nonselfsim, threads: cli.threads };
    let out = cli.out.as_path();
    std::fs::create_dir_all(out)?;
    match cli.command {
        Command::Coverage => {
            let r = run_coverage(&cfg, &opts)?;
            write(out, "coverage.csv", &coverage_csv(&r.rows))?;
            write(out, "coverage_summary.json", &to_json(&Summary { config: &cfg, result: &r })?)?;
        }
        Command::Diameter => {
            let r = run_diameter_scaling(&cfg, &opts)?;
            write(out, "diameter.csv", &diameter_csv(&r.rows))?;
            write(out, "diameter_summary.json", &to_json(&Summary { config: &cfg, result: &r })?)?;
        }
        Command::LepskiDiag => {
            let r = run_lepski_diag(&cfg, &opts)?;
            write(out, "lepski_diag.csv", &lepski_csv(&r.rows))?;
            write(out, "lepski_summary.json", &to_json(&Summary { config: &cfg, result: &r })?)?;
        }
        Command::Lowerbound => {
            let r = run_lowerbound_demo(&cfg, &opts, Some(out))?;
            write(out, "lowerbound.json", &to_json(&r)?)?;
            write(out, "manifest.json", &to_json(&Manifest { config: &cfg, files: harness::manifest(&r) })?)?;
        }
        Command::CheckSelfsim => {
            let truth = cfg.truth.as_ref().ok_or_else(|| HarnessError::Config("missing key truth".into()))?.build()?;
            let r = check_selfsim(&cfg, &truth)?;
            write(out, "membership.json", &to_json(&r)?)?;
            if !r.passed {
                return Err(HarnessError::Gate(format!("failing scales {:?}", r.membership.failures)));
            }
        }
        Command::MakeTruth => {
            let truth = cfg.truth.as_ref().ok_or_else(|| HarnessError::Config("missing key truth".into()))?.build()?;
            truth.write_file(out.join("truth.txt"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("confball: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
