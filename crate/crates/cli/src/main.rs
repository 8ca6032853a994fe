//! `fivew`: batch front end for the 5W verification pipeline.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Failure classes mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid inputs, missing backends: exit 2.
    Input(String),
    /// Anything else: exit 1.
    Internal(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Internal(e)
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

#[derive(Parser, Debug)]
#[command(name = "fivew", version, about = "5W question-answer based claim verification pipeline")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = "FIVEW_CONFIG")]
    config: Option<PathBuf>,

    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Ingest, deduplicate and optionally split source files into one corpus.
    BuildCorpus(BuildCorpusArgs),
    /// Generate, filter and score paraphrases for each model.
    ParaphraseEval(ParaphraseEvalArgs),
    /// Generate 5W question-answer pairs from role frames.
    Qagen(QagenArgs),
    /// Answer every pair from evidence and report per-W verdicts.
    Validate(ValidateArgs),
    /// Score question generators against answerers.
    EvalGrid(EvalGridArgs),
}

#[derive(Args, Debug)]
pub struct BuildCorpusArgs {
    /// Source file; repeatable.
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Adapter per input, or one for all: fever, hover, vitc, faviq,
    /// factify1, factify2, other, generic.
    #[arg(long = "adapter", required = true)]
    pub adapters: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    /// Train, dev and test fractions, e.g. 0.8,0.1,0.1.
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct ParaphraseEvalArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Paraphrase backends: configured model ids or compact descriptors.
    #[arg(long, value_delimiter = ',', required = true)]
    pub models: Vec<String>,
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum QagModeArg {
    Template,
    Generative,
}

#[derive(Args, Debug)]
pub struct QagenArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long, value_enum, default_value = "template")]
    pub mode: QagModeArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Fail instead of falling back to templates when generation fails.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// QA backend: configured model id or compact descriptor.
    #[arg(long)]
    pub qa_backend: String,
    #[arg(long)]
    pub report: PathBuf,
    /// Overrides such as tau_support=0.6,confidence_floor=0.2.
    #[arg(long, value_delimiter = ',')]
    pub thresholds: Vec<String>,
    /// Also count verdicts at each of these tau_support values.
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct EvalGridArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Question generators: `template` or QG backend references.
    #[arg(long, value_delimiter = ',', required = true)]
    pub qag: Vec<String>,
    /// QA backend references.
    #[arg(long, value_delimiter = ',', required = true)]
    pub qa: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "claim")]
    pub conditions: Vec<String>,
    #[arg(long)]
    pub report: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = commands::load_config(cli.config.as_deref()).and_then(|config| match &cli.command {
        Command::BuildCorpus(a) => commands::build_corpus(a, &config),
        Command::ParaphraseEval(a) => commands::paraphrase_eval(a, &config),
        Command::Qagen(a) => commands::qagen(a, &config),
        Command::Validate(a) => commands::validate(a, &config),
        Command::EvalGrid(a) => commands::eval_grid(a, &config),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Input(msg) => eprintln!("error: {msg}"),
                CliError::Internal(err) => eprintln!("internal error: {err:#}"),
            }
            ExitCode::from(e.code())
        }
    }
}
