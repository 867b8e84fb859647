use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "glossvec",
    about = "Train, query, and evaluate sense embeddings learned from dictionary glosses",
    version
)]
pub struct Cli {
    /// JSON config file; command-line flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Seed for all randomness (initialization, shuffling, baselines).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for data-parallel sections.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Emit machine-readable JSON instead of human-readable tables.
    #[arg(long, global = true)]
    pub json: bool,

    /// Suppress timestamps on log lines (for byte-reproducible runs).
    #[arg(long, global = true)]
    pub no_timestamps: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the training phases and write a checkpoint.
    Train(TrainArgs),
    /// Write the sense embeddings in word-vector text format.
    ExportSenses(ExportArgs),
    /// Nearest neighbors of a sense (or a word) by cosine similarity.
    Nearest(NearestArgs),
    /// Rank senses against a free-text description.
    Match(MatchArgs),
    /// Assign senses to marked positions in JSON-lines input.
    Disambiguate(DisambiguateArgs),
    /// Context-free word-similarity evaluation (Spearman rho).
    EvalWordsim(EvalWordsimArgs),
    /// Contextual word-similarity evaluation (Spearman rho).
    EvalScws(EvalScwsArgs),
    /// Cluster-aware WSD evaluation (precision/recall/F1).
    EvalWsd(EvalWsdArgs),
    /// Verify gradients against finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellArg {
    Rnn,
    Gru,
    Lstm,
}

impl CellArg {
    pub fn to_kind(self) -> glossvec_core::neuralnet::CellKind {
        use glossvec_core::neuralnet::CellKind;
        match self {
            CellArg::Rnn => CellKind::Vanilla,
            CellArg::Gru => CellKind::Gru,
            CellArg::Lstm => CellKind::Lstm,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Sense inventory (JSON lines).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    /// Pretrained word vectors (text format).
    #[arg(long)]
    pub vectors: Option<PathBuf>,

    /// Output checkpoint path.
    #[arg(long)]
    pub out: PathBuf,

    /// Which phase to run. Phases 2 and 3 need --in.
    #[arg(long, value_enum, default_value = "all")]
    pub phase: PhaseArg,

    /// Resume from an existing checkpoint.
    #[arg(long = "in")]
    pub resume: Option<PathBuf>,

    /// Recurrent cell.
    #[arg(long, value_enum)]
    pub cell: Option<CellArg>,

    /// Hidden dimension (default: the embedding dimension).
    #[arg(long)]
    pub hidden: Option<usize>,

    #[arg(long)]
    pub epochs1: Option<usize>,

    #[arg(long)]
    pub epochs2: Option<usize>,

    #[arg(long)]
    pub epochs3: Option<usize>,

    #[arg(long)]
    pub batch_size: Option<usize>,

    /// Threshold on the best gloss-token cosine during initialization.
    #[arg(long)]
    pub sim_threshold: Option<f64>,

    /// Adadelta rate multiplier.
    #[arg(long)]
    pub rate: Option<f64>,

    /// Adadelta decay.
    #[arg(long)]
    pub rho: Option<f64>,

    /// Adadelta epsilon.
    #[arg(long)]
    pub eps: Option<f64>,

    /// Disable per-epoch shuffling.
    #[arg(long)]
    pub no_shuffle: bool,

    #[arg(long)]
    pub max_gloss_tokens: Option<usize>,

    /// Optional global-norm gradient clip.
    #[arg(long)]
    pub clip_norm: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    #[arg(long)]
    pub ckpt: PathBuf,

    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct NearestArgs {
    #[arg(long)]
    pub ckpt: Option<PathBuf>,

    /// Query sense id (searches the sense table).
    #[arg(long, conflicts_with = "word")]
    pub sense: Option<String>,

    /// Query word (searches the word-vector file; needs --vectors).
    #[arg(long)]
    pub word: Option<String>,

    /// Word vectors, required with --word.
    #[arg(long)]
    pub vectors: Option<PathBuf>,

    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[arg(long)]
    pub ckpt: PathBuf,

    #[arg(long)]
    pub vectors: Option<PathBuf>,

    /// The description to encode.
    #[arg(long)]
    pub text: String,

    #[arg(long, default_value_t = 10)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct DisambiguateArgs {
    #[arg(long)]
    pub ckpt: PathBuf,

    #[arg(long)]
    pub vectors: Option<PathBuf>,

    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    /// JSON-lines input file; `-` or absent reads stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalWordsimArgs {
    #[arg(long)]
    pub ckpt: PathBuf,

    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    /// CSV: word1,word2,score with optional header.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalScwsArgs {
    #[arg(long)]
    pub ckpt: PathBuf,

    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    #[arg(long)]
    pub vectors: Option<PathBuf>,

    /// Tab-separated rows with <b>-marked contexts.
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvalWsdArgs {
    #[arg(long)]
    pub ckpt: PathBuf,

    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    #[arg(long)]
    pub vectors: Option<PathBuf>,

    /// JSON lines: {"tokens": [...], "targets": [...], "ids": [...]}.
    #[arg(long)]
    pub instances: PathBuf,

    /// Gold key: "instance_id sense_id" lines.
    #[arg(long)]
    pub key: PathBuf,

    /// Sense clustering: "sense_id cluster_id" lines.
    #[arg(long)]
    pub clusters: Option<PathBuf>,

    /// Sense-id substitution applied to predictions.
    #[arg(long)]
    pub sense_map: Option<PathBuf>,

    /// Replace the model with a seeded uniform sense picker.
    #[arg(long)]
    pub random_baseline: bool,
}

#[derive(Args, Debug)]
pub struct GradcheckArgs {
    /// Check one cell kind, or all three.
    #[arg(long)]
    pub cell: Option<CellArg>,

    /// Maximum relative error accepted.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
}
