//! `rac-forge` command line: every pipeline stage as a file-to-file
//! subcommand.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration or usage
//! error, 3 provider exhaustion.

mod commands;
mod pipeline;
pub mod server;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rac_forge::curation::SftStyle;
use rac_forge::{Label, Tier};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TEST_FRACTION: f64 = 0.05;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PROVIDER: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] rac_forge::Error),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    ProviderExhausted(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use rac_forge::Error as E;
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::ProviderExhausted(_) => EXIT_PROVIDER,
            CliError::Core(e) => match e {
                E::Record(_) | E::Validation(_) | E::EmptyDataset | E::Line { .. } | E::Json(_) => {
                    EXIT_VALIDATION
                }
                E::Config(_) | E::Io(_) | E::NotFound(_) => EXIT_CONFIG,
                E::Provider(_) => EXIT_PROVIDER,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "rac-forge", version, about = "Build, curate and evaluate RaC multiple-choice datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean and segment books listed in a manifest
    Ingest(IngestArgs),
    /// Generate RaC pairs from segments
    Generate(GenerateArgs),
    /// Check pairs against the record invariants
    Validate(ValidateArgs),
    /// Drop repeated questions
    Dedupe(DedupeArgs),
    /// ChoiceBoost: place each correct answer at every label
    Augment(InOut),
    /// Answer-position distribution report
    Bias(InOut),
    /// Seeded train/test split
    Split(SplitArgs),
    /// Write a supervised fine-tuning file
    ExportSft(ExportSftArgs),
    /// Sub-domain distribution and term frequencies
    Stats(StatsArgs),
    /// Merge a down-sampled easy set with a hard set
    ComposeComprehensive(ComposeArgs),
    /// Evaluate an answerer on a problem set
    Eval(EvalArgs),
    /// Human review sessions
    #[command(subcommand)]
    Review(ReviewCommand),
    /// Run every stage from corpus to evaluation
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct InOut {
    /// Input pair file (JSONL)
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// JSON object mapping file name to book id
    #[arg(long)]
    pub manifest: PathBuf,
    /// Segments file (JSONL)
    #[arg(long)]
    pub out: PathBuf,
    /// Approximate token budget per segment
    #[arg(long, default_value_t = rac_forge::ingest::DEFAULT_BUDGET)]
    pub budget: usize,
    /// Replace the caption-line patterns (regex, repeatable)
    #[arg(long = "caption-pattern")]
    pub caption_patterns: Vec<String>,
}

#[derive(Debug, Args, Clone)]
pub struct ProviderArgs {
    /// Base URL of an OpenAI-compatible endpoint
    #[arg(long, conflicts_with = "mock_seed")]
    pub endpoint: Option<String>,
    /// Use the deterministic offline provider with this seed
    #[arg(long)]
    pub mock_seed: Option<u64>,
    #[arg(long, default_value = "gpt-4")]
    pub model: String,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
    #[arg(long, default_value_t = 4)]
    pub parallelism: usize,
}

#[derive(Debug, Args, Clone)]
pub struct SamplingArgs {
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 1.0)]
    pub top_p: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub frequency_penalty: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub presence_penalty: f64,
    /// Questions requested per segment
    #[arg(long, default_value_t = 3)]
    pub questions: usize,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Segments file from `ingest`
    #[arg(long)]
    pub segments: PathBuf,
    /// Generated pairs (JSONL)
    #[arg(long)]
    pub out: PathBuf,
    /// Per-segment batch records (JSONL)
    #[arg(long)]
    pub audit: Option<PathBuf>,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Pairs that passed every check
    #[arg(long)]
    pub out: PathBuf,
    /// Issue report (JSON)
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DedupeKey {
    /// Normalized question text
    Question,
    /// Content id
    Id,
}

#[derive(Debug, Args)]
pub struct DedupeArgs {
    #[command(flatten)]
    pub io: InOut,
    #[arg(long, value_enum, default_value_t = DedupeKey::Question)]
    pub by: DedupeKey,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Fraction of pairs placed in the test side
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    pub fraction: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExportSftArgs {
    #[command(flatten)]
    pub io: InOut,
    /// `rac` (rephrase + contrastive analysis) or `plain`
    #[arg(long, default_value = "rac")]
    pub style: SftStyle,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub io: InOut,
    /// Taxonomy file; the built-in nine-category scheme when omitted
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long, default_value_t = rac_forge::curation::DEFAULT_TOP_K)]
    pub top_k: usize,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[arg(long)]
    pub easy: PathBuf,
    #[arg(long)]
    pub hard: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Provenance record (JSON)
    #[arg(long)]
    pub provenance: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum AnswererKind {
    Oracle,
    Constant,
    Random,
    Endpoint,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Problem set (pair JSONL)
    #[arg(long)]
    pub set: PathBuf,
    /// Report (JSON)
    #[arg(long)]
    pub out: PathBuf,
    /// Per-item records (JSONL)
    #[arg(long)]
    pub items: Option<PathBuf>,
    /// Set name in the report; defaults to the file stem
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value = "easy")]
    pub tier: Tier,
    #[arg(long, value_enum, default_value_t = AnswererKind::Oracle)]
    pub answerer: AnswererKind,
    /// Label used by the constant answerer
    #[arg(long, default_value = "A")]
    pub label: Label,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Base URL for the endpoint answerer
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, default_value = "gpt-4")]
    pub model: String,
    #[arg(long, default_value_t = 0.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 3)]
    pub max_retries: u32,
    #[arg(long, default_value_t = 4)]
    pub parallelism: usize,
    /// Classify pairs without a sub-domain using this taxonomy file
    /// (`default` for the built-in scheme)
    #[arg(long)]
    pub taxonomy: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum ReviewCommand {
    /// Serve the review HTTP API
    Serve(ServeArgs),
    /// Create a review session from the command line
    Sample(SampleArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Review state directory
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, default_value_t = server::DEFAULT_PORT)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory holding the review UI bundle
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    /// Base directory for relative dataset paths in session requests
    #[arg(long, default_value = ".")]
    pub data_root: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Review state directory
    #[arg(long)]
    pub dir: PathBuf,
    /// Sampled pairs (JSONL)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = rac_forge::review::DEFAULT_SAMPLE_SIZE)]
    pub size: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for every artifact
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = rac_forge::ingest::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value_t = DEFAULT_TEST_FRACTION)]
    pub fraction: f64,
    /// Seed for the split
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub provider: ProviderArgs,
    #[command(flatten)]
    pub sampling: SamplingArgs,
}

/// Parse `argv` (including the program name) and run the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Generate(a) => commands::generate(a),
        Command::Validate(a) => commands::validate(a),
        Command::Dedupe(a) => commands::dedupe(a),
        Command::Augment(a) => commands::augment(a),
        Command::Bias(a) => commands::bias(a),
        Command::Split(a) => commands::split(a),
        Command::ExportSft(a) => commands::export_sft(a),
        Command::Stats(a) => commands::stats(a),
        Command::ComposeComprehensive(a) => commands::compose(a),
        Command::Eval(a) => commands::eval(a),
        Command::Review(ReviewCommand::Serve(a)) => server::serve(a),
        Command::Review(ReviewCommand::Sample(a)) => commands::review_sample(a),
        Command::Pipeline(a) => pipeline::run(a),
    }
}
