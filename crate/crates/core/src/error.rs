use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate language code `{code}`")]
    DuplicateCode { code: String },

    #[error("line {line}: {message}")]
    MalformedRow { line: u64, message: String },

    #[error("unknown language code `{code}`")]
    NotFound { code: String },

    #[error("invalid UTF-8 at byte offset {offset}")]
    InvalidUtf8 { offset: usize },

    #[error("line {line}: expected exactly one tab, found {tabs}")]
    TsvRow { line: u64, tabs: usize },

    #[error("line {line}: {message}")]
    JsonlSchema { line: u64, message: String },

    #[error("paired files differ in length: {src} source lines vs {tgt} target lines")]
    PairedLength { src: usize, tgt: usize },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("{0}")]
    InvalidArgument(String),

    #[error("token id {id} is not in the vocabulary")]
    UnknownId { id: u32 },

    #[error("requested {requested} extension pieces but only {available} are available")]
    ExtensionTooLarge { requested: usize, available: usize },

    #[error("malformed vocabulary: {0}")]
    VocabFormat(String),

    #[error("truncated character at byte offset {offset}")]
    Truncated { offset: usize },

    #[error("invalid byte 0x{byte:02X} at offset {offset}")]
    MalformedStream { offset: usize, byte: u8 },

    #[error("invalid .ptk header: {0}")]
    PtkHeader(String),

    #[error("byte 0x{0:02X} is not a three-byte UTF-8 lead")]
    InvalidPrefix(u8),

    #[error("empty baseline")]
    EmptyBaseline,

    #[error("row `{row}` is missing direction `{direction}`")]
    MissingDirection { row: String, direction: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short, stable identifier used in machine-readable diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::DuplicateCode { .. } => "duplicate-code",
            Error::MalformedRow { .. } => "malformed-row",
            Error::NotFound { .. } => "not-found",
            Error::InvalidUtf8 { .. } => "invalid-utf8",
            Error::TsvRow { .. } => "tsv-row",
            Error::JsonlSchema { .. } => "jsonl-schema",
            Error::PairedLength { .. } => "paired-length",
            Error::EmptyCorpus => "empty-corpus",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::UnknownId { .. } => "unknown-id",
            Error::ExtensionTooLarge { .. } => "extension-too-large",
            Error::VocabFormat(_) => "vocab-format",
            Error::Truncated { .. } => "truncated",
            Error::MalformedStream { .. } => "malformed-stream",
            Error::PtkHeader(_) => "ptk-header",
            Error::InvalidPrefix(_) => "invalid-prefix",
            Error::EmptyBaseline => "empty-baseline",
            Error::MissingDirection { .. } => "missing-direction",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}
