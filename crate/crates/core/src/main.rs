use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use coactive::config::ExperimentConfig;
use coactive::experiment::run_experiment;

#[derive(Parser)]
#[command(name = "coactive", version, about = "Simulate online learning from preference-improvement feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Overrides {
    /// Key-value config file; flags below take precedence over it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// ranking | item | adversary
    #[arg(long)]
    task: Option<String>,
    /// perceptron | batch | convex
    #[arg(long)]
    learner: Option<String>,
    /// strict_alpha | noisy_relevance | rating_increment | expected_alpha
    #[arg(long)]
    user: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Horizon (rounds per seed).
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Comma list of seeds; `a..b` expands to a range.
    #[arg(long)]
    seeds: Option<String>,
    /// Output directory for traces.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any other config key, as key=value. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write per-seed and aggregate traces.
    Run(Overrides),
    /// Print the resolved configuration without running it.
    Config(Overrides),
}

fn resolve(o: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &o.set {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("--set expects KEY=VALUE, got '{kv}'"))?;
        cfg.set(k, v)?;
    }
    let flags = [
        ("task", o.task.clone()),
        ("learner", o.learner.clone()),
        ("user", o.user.clone()),
        ("alpha", o.alpha.map(|a| a.to_string())),
        ("T", o.horizon.map(|t| t.to_string())),
        ("seeds", o.seeds.clone()),
        ("out", o.out.as_ref().map(|p| p.display().to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(o) => resolve(o).and_then(|cfg| {
            let out = run_experiment(&cfg)?;
            for f in &out.files {
                println!("{}", f.display());
            }
            Ok(())
        }),
        Command::Config(o) => resolve(o).map(|cfg| print!("{}", cfg.to_text())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
