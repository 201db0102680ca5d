use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entropy_ipp::experiment::{self, ExperimentConfig, Overrides, RunOutcome};
use entropy_ipp::Error;

/// Sparse-GP field reconstruction experiments.
#[derive(Parser)]
#[command(name = "entropy-ipp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Parse and validate a config, then print the resolved form and its hash.
    Validate {
        config: PathBuf,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Re-run a stored flow-field trial and compare it with its table.
    Replay { trial_dir: PathBuf },
}

#[derive(Args)]
struct OverrideArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<usize>,
    /// Replace the horizon list with a single horizon.
    #[arg(long)]
    horizon: Option<usize>,
}

impl OverrideArgs {
    fn resolve(&self, path: &Path) -> Result<ExperimentConfig, Error> {
        let mut cfg = ExperimentConfig::load(path)?;
        cfg.apply(&Overrides {
            seed: self.seed,
            output_dir: self.out.clone(),
            trials: self.trials,
            horizon: self.horizon,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvariantViolation(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { config, overrides } => {
            let cfg = overrides.resolve(&config)?;
            print!("{}", cfg.to_toml_string()?);
            println!("# config_hash = {}", cfg.hash()?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { config, overrides } => {
            let cfg = overrides.resolve(&config)?;
            println!("config_hash {}", cfg.hash()?);
            match experiment::run(&cfg)? {
                RunOutcome::BoundDemo(d) => {
                    let breaks = d.instances.iter().filter(|i| i.ci_breaks() > 0).count();
                    println!("{} instances, 0 bound violations, {breaks} with 1-sigma breaks", d.instances.len());
                }
                RunOutcome::Flowfield(f) => summarize(&f, &cfg),
                RunOutcome::Comparison(c) => {
                    summarize(&c.entropy_min, &cfg);
                    summarize(&c.entropy_max, &cfg);
                }
            }
            println!("results in {}", cfg.output_dir.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Replay { trial_dir } => {
            let report = experiment::replay(&trial_dir)?;
            match report.first_mismatch {
                None => {
                    println!("replay matches ({} rows)", report.rows);
                    Ok(ExitCode::SUCCESS)
                }
                Some(line) => {
                    eprintln!("replay differs from trial.csv at line {line}");
                    Ok(ExitCode::from(2))
                }
            }
        }
    }
}

fn summarize(out: &experiment::FlowfieldOutcome, cfg: &ExperimentConfig) {
    let last = cfg.planner.steps;
    for &h in &cfg.planner.horizons {
        if let (Some(a), Some(b)) = (out.aggregate_at(h, 0), out.aggregate_at(h, last)) {
            println!(
                "{} N={h}: mean abs error {:.4} -> {:.4}, entropy {:.3} -> {:.3}",
                out.planner.name(),
                a.error_mean,
                b.error_mean,
                a.entropy_mean,
                b.entropy_mean
            );
        }
    }
}
