//! Tokenizer analysis for multilingual language models.
//!
//! - [`lang`]: per-language metadata for the FLORES-101 languages.
//! - [`corpus`]: monolingual and parallel corpus loading and sampling.
//! - [`tokenizer`]: byte-fallback BPE, word-level BPE and unigram tokenizers,
//!   plus vocabulary extension.
//! - [`metrics`]: over-tokenization ratio, token overlap and corpus BLEU.
//! - [`postok`]: lossless stripping of shared UTF-8 lead bytes.
//! - [`quadrant`]: bilingual/multilingual gain classification of tuned models.
//! - [`report`]: plot series for the classification results.

pub mod corpus;
pub mod error;
pub mod lang;
pub mod metrics;
pub mod postok;
pub mod quadrant;
pub mod report;
pub mod tokenizer;

pub use corpus::{Corpus, CorpusLanguage, MonoCorpus, ParallelCorpus, SentencePair};
pub use error::{Error, Result};
pub use lang::{LanguageInfo, LanguageRegistry};
pub use metrics::{OverlapReport, TokenizationReport};
pub use postok::{CharCensus, PrefixCodec};
pub use quadrant::{DeltaResult, PerformanceMatrix, Quadrant, QuadrantAssignment, SignificanceParams};
pub use report::PlotSeries;
pub use tokenizer::{Mode, TokenId, Tokenizer};
