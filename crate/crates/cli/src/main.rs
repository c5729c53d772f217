mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunConfig, SEED_ENV};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input; exit code 1.
    User(String),
    /// A failure that is not the caller's fault; exit code 2.
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::User(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "evtime", version, about = "Anchor events in time from sub-level relations")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Set one configuration key, e.g. `--override sw=2`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Build E-D and E-T link datasets from a corpus.
    Induce,
    /// Train the relation classifiers.
    Train,
    /// Predict relation vectors for a link dataset and score them.
    Predict,
    /// Turn predicted relations into event anchors.
    Infer,
    /// Infer from gold relations over several sentence windows.
    Oracle,
    /// Score inferred anchors, predictions and annotator agreement.
    Evaluate,
    /// Print corpus counts.
    CorpusStats,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides, env_seed.as_deref(), cli.out.as_deref())?;
    match cli.command {
        Command::Induce => commands::induce(&config),
        Command::Train => commands::train(&config),
        Command::Predict => commands::predict(&config),
        Command::Infer => commands::infer(&config),
        Command::Oracle => commands::oracle(&config),
        Command::Evaluate => commands::evaluate(&config),
        Command::CorpusStats => commands::corpus_stats(&config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("{e}");
            match e {
                CliError::User(_) => ExitCode::from(1),
                CliError::Internal(_) => ExitCode::from(2),
            }
        }
        Err(_) => ExitCode::from(2),
    }
}
