//! Command-line front end.
//!
//! ```text
//! chemotaxis simulate  <config>   # sim1d | sim2d | radial configs
//! chemotaxis stability <config>   # stability-report config
//! chemotaxis sweep     <config>   # parameter-grid sweep
//! chemotaxis eigenmap  <config>   # (χ, μ) eigenvalue map
//! chemotaxis analyze   <run_dir>  # recompute a run's pattern summary
//! ```
//!
//! Exit codes: 0 success, 2 config error, 3 numerical abort
//! (blow-up / stiffness), 1 other failures. The output root comes from
//! `--out`, else `$CHEMOTAXIS_OUT`, else the config's `run.output_dir`.

use chemotaxis_cli::analyze::analyze_run_dir;
use chemotaxis_cli::config::{parse_config, ConfigError, ExperimentConfig, Mode};
use chemotaxis_cli::output::summary_block;
use chemotaxis_cli::runner::{run_experiment, ExperimentOutput};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chemotaxis", version, about = "Two-phenotype chemotaxis pattern-formation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the noise seed of the initial condition.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output root directory (overrides $CHEMOTAXIS_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a 1D, 2D, or radial simulation.
    Simulate { config: PathBuf },
    /// Compute the linear-stability report.
    Stability { config: PathBuf },
    /// Run a parameter sweep of independent simulations.
    Sweep { config: PathBuf },
    /// Map eigenvalue extrema over a (χ, μ) grid.
    Eigenmap { config: PathBuf },
    /// Recompute the pattern summary of a finished run directory.
    Analyze { run_dir: PathBuf },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn load_config(
    path: &Path,
    hint: Mode,
    allowed: &[Mode],
    seed_override: Option<u64>,
) -> Result<ExperimentConfig, ConfigError> {
    let mut text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    if let Some(seed) = seed_override {
        // replace in place so the remaining lines keep their numbers
        text = text
            .lines()
            .map(|line| {
                let key = line.split('=').next().unwrap_or("").trim();
                if key == "seed" || key == "ic.seed" {
                    "# (seed overridden by --seed)".to_string()
                } else {
                    line.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n");
        text.push_str(&format!("\nic.seed = {seed}\n"));
    }
    let cfg = parse_config(&text, Some(hint))?;
    if !allowed.contains(&cfg.mode) {
        return Err(ConfigError::Invalid(format!(
            "config mode `{}` does not match this subcommand (expected one of: {})",
            cfg.mode.label(),
            allowed.iter().map(|m| m.label()).collect::<Vec<_>>().join("|")
        )));
    }
    Ok(cfg)
}

fn out_root(cli_out: &Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = cli_out {
        return dir.clone();
    }
    if let Ok(dir) = std::env::var("CHEMOTAXIS_OUT") {
        if !dir.is_empty() {
            return PathBuf::from(dir);
        }
    }
    cfg.output_dir.clone()
}

fn report(output: &ExperimentOutput) {
    println!("run {} -> {}", output.run_id, output.dir.display());
    if let Some(outcome) = &output.outcome {
        println!("  outcome: {outcome:?}");
    }
    if let Some(summary) = &output.summary {
        for line in summary_block(summary).lines() {
            println!("  {line}");
        }
    }
    for child in &output.children {
        report(child);
    }
}

fn execute(path: &Path, hint: Mode, allowed: &[Mode], cli: &Cli) -> ExitCode {
    let cfg = match load_config(path, hint, allowed, cli.seed) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let root = out_root(&cli.out, &cfg);
    match run_experiment(&cfg, &root) {
        Ok(output) => {
            report(&output);
            if output.aborted() {
                eprintln!(
                    "numerical abort; partial artifacts retained in {}",
                    output.dir.display()
                );
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Simulate { config } => execute(
            config,
            Mode::Sim1D,
            &[Mode::Sim1D, Mode::Sim2D, Mode::Radial],
            &cli,
        ),
        Command::Stability { config } => execute(config, Mode::Stability, &[Mode::Stability], &cli),
        Command::Sweep { config } => execute(config, Mode::Sweep, &[Mode::Sweep], &cli),
        Command::Eigenmap { config } => execute(config, Mode::EigenMap, &[Mode::EigenMap], &cli),
        Command::Analyze { run_dir } => match analyze_run_dir(run_dir) {
            Ok(summary) => {
                print!("{}", summary_block(&summary));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("analyze error: {e}");
                ExitCode::FAILURE
            }
        },
    }
}
