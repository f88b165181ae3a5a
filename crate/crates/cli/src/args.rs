use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "scalemetrics", version, about = "Team-size scaling analysis of commit histories")]
pub struct Cli {
    /// RNG seed for bootstrap and simulation.
    #[arg(long, global = true, env = "SCALEMETRICS_SEED", default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a commit log and write the canonical JSON-lines history.
    Ingest(IngestArgs),
    /// Run both methodologies, tail fits and cascade statistics on one history.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic history with a ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Analyze every history in a directory and tabulate regimes.
    Compare(CompareArgs),
    /// Render a saved report as text or CSV.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Auto,
    Log,
    Jsonl,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    #[arg(long = "input-format", value_enum, default_value_t = InputFormat::Auto)]
    pub input_format: InputFormat,

    /// JSON object mapping raw identities to canonical ones.
    #[arg(long)]
    pub aliases: Option<PathBuf>,

    /// Drop commits by this author (repeatable).
    #[arg(long = "deny")]
    pub deny: Vec<String>,

    /// Keep merge commits (parent count >= 2).
    #[arg(long)]
    pub include_merges: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    pub input: PathBuf,

    #[command(flatten)]
    pub input_opts: InputArgs,

    /// Output path; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Commits,
    Loc,
    LocAdded,
    LocDeleted,
    Lev,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Hill,
    Mle,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// Fixed window length for production scaling (e.g. 5d, 12h, 3600).
    #[arg(long, default_value = "5d")]
    pub window: String,

    /// Inter-commit-gap quantile that sizes the mean-productivity windows.
    #[arg(long, default_value_t = 0.9)]
    pub quantile: f64,

    #[arg(long, value_enum, default_value_t = MeasureArg::Commits)]
    pub measure: MeasureArg,

    #[arg(long, value_enum, default_value_t = EstimatorArg::Both)]
    pub estimator: EstimatorArg,

    /// Hill tail size; defaults to max(10, sqrt(authors)).
    #[arg(long)]
    pub hill_k: Option<usize>,

    #[arg(long, default_value_t = 5)]
    pub bins_per_decade: u32,

    /// Fit raw window observations instead of log-binned means.
    #[arg(long)]
    pub no_binning: bool,

    /// Bootstrap the slope interval with this many resamples.
    #[arg(long)]
    pub bootstrap: Option<usize>,

    /// Cascade gap threshold (e.g. 2h); defaults to the 10th-percentile gap.
    #[arg(long)]
    pub tau: Option<String>,

    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,

    #[command(flatten)]
    pub input_opts: InputArgs,

    #[command(flatten)]
    pub analysis: AnalysisArgs,

    /// Write the full report bundle (JSON, text, CSVs) here.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Directory of `.log` / `.jsonl` histories.
    pub corpus: PathBuf,

    #[command(flatten)]
    pub input_opts: InputArgs,

    #[command(flatten)]
    pub analysis: AnalysisArgs,

    /// Projects analyzed concurrently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,

    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// A `report.json` from analyze or a `summary.json` from compare.
    pub report: PathBuf,

    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(subcommand)]
    pub generator: Generator,

    /// History output (JSON lines).
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    /// Ground-truth sidecar; defaults to `<output stem>.truth.json`.
    #[arg(long, global = true)]
    pub sidecar: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Generator {
    /// One ranked-contribution team: member j commits round(N / j^alpha).
    Zipf {
        #[arg(long = "top", short = 'N')]
        top: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, short = 'n')]
        n: u64,
        #[arg(long, default_value = "5d")]
        window: String,
    },
    /// Consecutive windows of ranked-contribution teams of varying size.
    ZipfGrowth {
        #[arg(long = "top", short = 'N', default_value_t = 50.0)]
        top: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 60)]
        windows: usize,
        #[arg(long, default_value_t = 10)]
        n_min: u64,
        #[arg(long, default_value_t = 1000)]
        n_max: u64,
        #[arg(long, default_value = "5d")]
        window: String,
    },
    /// Branching commit stream with heavy-tailed author participation.
    Branching {
        #[arg(long)]
        eta: f64,
        /// Immigrant events per second.
        #[arg(long, default_value_t = 2e-5)]
        rate: f64,
        /// Mean offspring delay.
        #[arg(long, default_value = "1d")]
        delay: String,
        #[arg(long, default_value = "3650d")]
        horizon: String,
        #[arg(long, default_value_t = 1000)]
        participants: usize,
        /// Tail exponent of participation weights.
        #[arg(long, default_value_t = 0.7)]
        mu: f64,
        #[arg(long, default_value_t = 1_000_000)]
        cap: usize,
    },
}
