use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use graphmask_core::protocol::SplitMode;
use graphmask_core::{Split, Strategy, Tokenizer};

#[derive(Debug, Parser)]
#[command(name = "graphmask", version, about = "Graph linearisation, masking and evaluation pipeline")]
pub struct Cli {
    /// Worker threads for per-entry work (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convert WebNLG XML files into the canonical JSONL format.
    Ingest(IngestArgs),
    /// Assign levels and write the linearised form of every entry.
    Levelize(LevelizeArgs),
    /// Build a masked pre-training corpus.
    Mask(MaskArgs),
    /// Draw a low-resource fine-tune / pre-train split.
    Split(SplitArgs),
    /// Draw a fraction of the training entries.
    Sample(SampleArgs),
    /// Score hypotheses against references (BLEU, TER).
    Score(ScoreArgs),
    /// Summarise a canonical dataset.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long)]
    pub out: PathBuf,
    /// Replace existing output files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// WebNLG XML file; repeat to merge several files of the same split.
    #[arg(long = "xml", required = true)]
    pub xml: Vec<PathBuf>,
    #[arg(long)]
    pub split: Split,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct LevelizeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub no_level_markers: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long)]
    pub strategy: Strategy,
    #[arg(long)]
    pub seed: u64,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Mask one element per graph instead of one per level.
    #[arg(long)]
    pub one_per_graph: bool,
    #[arg(long, default_value_t = 2)]
    pub min_triples: usize,
    #[arg(long)]
    pub no_level_markers: bool,
    /// Only mask entries of this split.
    #[arg(long)]
    pub split: Option<Split>,
    /// Restrict to the ids of a `split` or `sample` output
    /// (its `pretrain_ids`, or `ids` for a sample).
    #[arg(long)]
    pub ids: Option<PathBuf>,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Fine-tune percentage of the training split, in (0, 100].
    #[arg(long)]
    pub k: f64,
    #[arg(long)]
    pub mode: SplitMode,
    #[arg(long)]
    pub seed: u64,
    /// Sample each category separately.
    #[arg(long)]
    pub stratified: bool,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Fraction of the training split, in (0, 1].
    #[arg(long)]
    pub fraction: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub hyp: PathBuf,
    /// Reference file, parallel to the hypotheses; repeat for more references.
    #[arg(long = "ref", required = true)]
    pub refs: Vec<PathBuf>,
    #[arg(long, default_value = "intl")]
    pub tokenizer: Tokenizer,
    #[arg(long)]
    pub lowercase: bool,
    /// Externally computed score copied into the report, as `name=value`.
    #[arg(long = "external")]
    pub external: Vec<String>,
    /// Report path; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-segment diagnostics as TSV.
    #[arg(long)]
    pub segments: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// JSON report path; a text summary goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}
