use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use toklens_core::quadrant::{Direction, DEFAULT_K};
use toklens_core::tokenizer::PreSplit;

#[derive(Debug, Parser)]
#[command(name = "toklens", version, about = "Tokenizer and quadrant analysis for multilingual LLMs")]
pub struct Cli {
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Report format. Inferred from a `.csv` output path when absent.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Seed for commands that sample.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a vocabulary from a one-sentence-per-line corpus.
    TrainVocab(TrainVocab),
    /// Append the top pieces of a learned vocabulary to a base vocabulary.
    ExtendVocab(ExtendVocab),
    #[command(subcommand)]
    Analyze(Analyze),
    /// Count three-byte characters per lead byte.
    Census(Census),
    /// Strip the dominant lead byte and write a `.ptk` stream.
    Compress(Compress),
    /// Restore text from a `.ptk` stream.
    Decompress(Decompress),
    /// Assign every model language to a quadrant.
    Classify(Classify),
    /// Quadrant counts over a list of k values.
    Sweep(Sweep),
    /// Scatter-plot data: bilingual Δ against multilingual Δ.
    PlotQuadrant(PlotQuadrant),
    /// Draw a seeded subset of lines (or TSV pairs).
    Sample(Sample),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainMode {
    Bbpe,
    Bpe,
    Unigram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Split {
    Whitespace,
    Line,
}

impl From<Split> for PreSplit {
    fn from(s: Split) -> Self {
        match s {
            Split::Whitespace => PreSplit::Whitespace,
            Split::Line => PreSplit::Line,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainVocab {
    #[arg(long, value_enum)]
    pub mode: TrainMode,
    /// Vocabulary size, byte tokens included.
    #[arg(long)]
    pub size: usize,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Training units for bbpe and unigram. Ignored by bpe.
    #[arg(long, value_enum, default_value = "whitespace")]
    pub pre_split: Split,
}

#[derive(Debug, Args)]
pub struct ExtendVocab {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub learned: PathBuf,
    #[arg(long)]
    pub size: usize,
}

#[derive(Debug, Subcommand)]
pub enum Analyze {
    /// Tokens per word (or per character for unspaced scripts).
    Tokenization(Tokenization),
    /// Shared distinct token ids between two corpora.
    Overlap(Overlap),
}

#[derive(Debug, Args)]
pub struct Tokenization {
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub lang: String,
    /// Language table CSV replacing the bundled one.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// Measure the prefix-stripped stream instead of raw text.
    #[arg(long)]
    pub codec: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Overlap {
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct Census {
    #[arg(long)]
    pub corpus: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prefix {
    Auto,
    Byte(u8),
}

fn parse_prefix(s: &str) -> Result<Prefix, String> {
    if s == "auto" {
        return Ok(Prefix::Auto);
    }
    let digits = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| format!("expected `auto` or a hex byte like 0xE0, got `{s}`"))?;
    let b = u8::from_str_radix(digits, 16).map_err(|e| format!("`{s}`: {e}"))?;
    if !(0xE0..=0xEF).contains(&b) {
        return Err(format!("0x{b:02X} is not a three-byte lead (0xE0..=0xEF)"));
    }
    Ok(Prefix::Byte(b))
}

#[derive(Debug, Args)]
pub struct Compress {
    #[arg(long, default_value = "auto", value_parser = parse_prefix)]
    pub prefix: Prefix,
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Also write the codec as JSON.
    #[arg(long)]
    pub codec_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Decompress {
    /// Codec JSON; must agree with the stream header when given.
    #[arg(long)]
    pub codec: Option<PathBuf>,
    #[arg(long = "in")]
    pub input: PathBuf,
}

fn parse_direction(s: &str) -> Result<Direction, String> {
    s.parse().map_err(|e: toklens_core::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// The two directions averaged into the multilingual score.
    #[arg(long, value_delimiter = ',', num_args = 1, value_parser = parse_direction)]
    pub mult: Vec<Direction>,
}

#[derive(Debug, Args)]
pub struct Classify {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: f64,
}

#[derive(Debug, Args)]
pub struct Sweep {
    #[command(flatten)]
    pub matrix: MatrixArgs,
    #[arg(long, value_delimiter = ',', default_value = "2,3,5,10,20")]
    pub k: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct PlotQuadrant {
    #[arg(long, required_unless_present = "assignments", conflicts_with = "assignments")]
    pub matrix: Option<PathBuf>,
    /// A report written by `classify`.
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_direction)]
    pub mult: Vec<Direction>,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: f64,
}

#[derive(Debug, Args)]
pub struct Sample {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = toklens_core::corpus::DEFAULT_SAMPLE_SIZE)]
    pub n: usize,
    /// Treat input as `src<TAB>tgt` pairs.
    #[arg(long)]
    pub tsv: bool,
}
