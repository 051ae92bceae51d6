use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use swssb_core::ensembles::{Symmetry, UnitaryMode};
use swssb_core::experiments::{
    emit_results, run_experiment, write_results, ConfigOverrides, Experiment, ExperimentConfig, OutputFormat,
    RandomnessMode,
};

#[derive(Parser)]
#[command(name = "swssb", version, about = "Symmetric random-state experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the available experiments.
    List,
    /// Run one experiment and emit its result records.
    Run(RunArgs),
    /// Print the resolved configuration without running.
    Config(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(value_parser = parse_experiment)]
    experiment: Experiment,
    /// JSON file with configuration keys; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "N")]
    n: Option<usize>,
    /// Comma-separated ranks.
    #[arg(long = "r", value_delimiter = ',')]
    r: Option<Vec<usize>>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long = "Q")]
    q: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    diagnostic_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// haar, clifford or pfc.
    #[arg(long, value_parser = parse_lower::<UnitaryMode>)]
    mode: Option<UnitaryMode>,
    /// z2 or u1.
    #[arg(long, value_parser = parse_lower::<Symmetry>)]
    symmetry: Option<Symmetry>,
    /// keyed or fresh.
    #[arg(long, value_parser = parse_lower::<RandomnessMode>)]
    randomness: Option<RandomnessMode>,
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, value_parser = parse_lower::<OutputFormat>)]
    format: Option<OutputFormat>,
    #[arg(long)]
    workers: Option<usize>,
    /// Include per-record wall time.
    #[arg(long)]
    timings: bool,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: swssb_core::Error| e.to_string())
}

fn parse_lower<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_lowercase())).map_err(|_| format!("unknown value '{s}'"))
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_file(path)
                .with_context(|| format!("reading config {}", path.display()))?,
            None => ConfigOverrides::default(),
        };
        let flags = ConfigOverrides {
            n: self.n,
            r_grid: self.r.clone(),
            k: self.k,
            q: self.q,
            samples: self.samples,
            diagnostic_samples: self.diagnostic_samples,
            seed: self.seed,
            unitary_mode: self.mode,
            symmetry: self.symmetry,
            randomness: self.randomness,
            output: self.out.clone(),
            format: self.format,
            workers: self.workers,
            timings: self.timings.then_some(true),
            ..Default::default()
        };
        Ok(ExperimentConfig::resolve(self.experiment, file.merge(flags))?)
    }
}

fn run(args: &RunArgs) -> Result<bool> {
    let config = args.resolve()?;
    let records = run_experiment(&config)?;
    match &config.output {
        Some(path) => emit_results(&records, config.format, config.timings, path)
            .with_context(|| format!("writing {}", path.display()))?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_results(&records, config.format, config.timings, &mut lock)?;
            lock.flush()?;
        }
    }
    let failed: Vec<_> = records.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        eprintln!("FAIL {} [{}] {} = {}", r.experiment, r.parameters, r.statistic, r.estimate);
    }
    eprintln!("{}: {} records, {} failed", config.experiment, records.len(), failed.len());
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::List => {
            for e in Experiment::ALL {
                println!("{:<22}{}", e.name(), e.description());
            }
            Ok(true)
        }
        Command::Run(args) => run(args),
        Command::Config(args) => args.resolve().and_then(|c| {
            println!("{}", serde_json::to_string_pretty(&c)?);
            Ok(true)
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
