mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Detect, filter and label event-related tweets.
#[derive(Debug, Parser)]
#[command(name = "tweetsift", version)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Pipeline configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Minimum election significance for expanded terms.
    #[arg(long, global = true, value_name = "F")]
    pub rho_min: Option<f64>,
    /// Election classifier decision threshold.
    #[arg(long, global = true, value_name = "F")]
    pub threshold: Option<f64>,
    #[arg(long, global = true, value_name = "N")]
    pub epochs: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub batch: Option<usize>,
    /// Learning rate.
    #[arg(long, global = true, value_name = "F")]
    pub lr: Option<f64>,
    /// Output file or directory, depending on the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count corpus terms and write the vocabulary.
    BuildVocab,
    /// Train skip-gram word vectors on the corpus.
    TrainEmbeddings,
    /// Expand the seed terms and write the expansion report.
    ExpandQuery,
    /// Build distant-supervision datasets with train/test splits.
    BuildDataset,
    /// Train the character-level election classifier.
    TrainElection,
    /// Train the topic classifier.
    TrainTopic,
    /// Train the sentiment classifier.
    TrainSentiment,
    /// Run all classifiers over a tweet file.
    Classify {
        /// Tweets to classify (defaults to the configured corpus).
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Score predictions against gold labels (JSONL with `id` and `label`).
    Evaluate {
        #[arg(long, value_name = "PATH")]
        pred: PathBuf,
        #[arg(long, value_name = "PATH")]
        gold: PathBuf,
    },
    /// Run capture, election filtering and labeling end to end.
    Pipeline,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message
                .lines()
                .map(|l| l.trim_start_matches("error: ").trim())
                .find(|l| !l.is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("error: usage: {first}");
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli.command, &cli.overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: {}: {message}", e.code());
            ExitCode::from(e.exit_code())
        }
    }
}
