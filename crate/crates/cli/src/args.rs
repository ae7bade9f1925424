use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hgc_core::condense::Method;
use hgc_core::graph::Pool;
use hgc_core::propagation::Fusion;

/// Training-free condensation of heterogeneous graphs.
#[derive(Debug, Parser)]
#[command(name = "hgc", version, propagate_version = true)]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print dataset statistics.
    Stats(StatsArgs),
    /// Condense a dataset and write the result as a new dataset.
    Condense(CondenseArgs),
    /// Train the linear proxy and score it on the full graph's test split.
    Eval(EvalArgs),
    /// Time condensation across methods, ratios or pool sizes.
    Bench(BenchArgs),
    /// Write a synthetic dataset.
    Synth(SynthArgs),
    /// Summarize one or more results files.
    Compare(CompareArgs),
    /// Re-run a command from its run manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

/// Condensation settings shared by `condense`, `eval` and `bench`. Unset
/// flags fall back to the config file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct SelectionArgs {
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub ratio: Option<f64>,
    /// One ratio per class, overriding --ratio.
    #[arg(long, value_delimiter = ',')]
    pub class_ratios: Option<Vec<f64>>,
    /// Comma-separated metapaths starting at the target type.
    #[arg(long, value_delimiter = ',')]
    pub metapaths: Option<Vec<String>>,
    #[arg(long)]
    pub fusion: Option<Fusion>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Select on the target type's raw features (ablation).
    #[arg(long)]
    pub raw_features: bool,
    #[arg(long)]
    pub pool: Option<Pool>,
    /// `1hop`, `khop:K` or `khop:K:CAP`.
    #[arg(long)]
    pub neighbor_policy: Option<String>,
}

#[derive(Debug, Args)]
pub struct CondenseArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Config file (JSON or key = value); flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Replace an existing output directory.
    #[arg(long)]
    pub overwrite: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value_t = 0.5)]
    pub lr: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub l2: f64,
    #[arg(long, default_value_t = 300)]
    pub iters: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// The full dataset; its test split is scored.
    #[arg(long)]
    pub data: PathBuf,
    /// A condensed dataset to train on. Without it the run either condenses
    /// in memory (--method/--ratio) or trains on the full training split.
    #[arg(long, conflicts_with_all = ["method", "ratio", "class_ratios", "config"])]
    pub condensed: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub selection: SelectionArgs,
    /// Runs with seeds seed, seed+1, ...
    #[arg(long, default_value_t = 1)]
    pub repeat: u64,
    #[command(flatten)]
    pub train: TrainArgs,
    /// Where to write results.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the text table here.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Dataset to time; mutually exclusive with --synthetic and --scaling.
    #[arg(long, conflicts_with_all = ["synthetic", "scaling"])]
    pub data: Option<PathBuf>,
    /// Generate a synthetic dataset with this many target nodes.
    #[arg(long, conflicts_with = "scaling")]
    pub synthetic: Option<usize>,
    /// Comma-separated pool sizes; fits a log-log slope of time against size.
    #[arg(long, value_delimiter = ',')]
    pub scaling: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', default_value = "herding,random")]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0.012")]
    pub ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub metapaths: Option<Vec<String>>,
    #[arg(long, default_value_t = 3)]
    pub repeat: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Layout {
    /// Paper / author / subject graph with three classes.
    Acm,
    /// Schema and counts of the DBLP benchmark.
    Dblp,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "acm")]
    pub layout: Layout,
    /// Target nodes (acm layout only).
    #[arg(long, default_value_t = 3000)]
    pub papers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub overwrite: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(required = true)]
    pub results: Vec<PathBuf>,
    /// Write the summary as csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded location.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
