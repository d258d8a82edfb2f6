use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: invalid UTF-8")]
    Decode { line: usize },

    #[error("line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("sentence has no gold segmentation")]
    MissingSpans,

    #[error("invalid segmentation: {0}")]
    InvalidSpans(String),

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("shape mismatch in {op}: expected {expected}, got {actual}")]
    ShapeMismatch {
        op: &'static str,
        expected: String,
        actual: String,
    },

    #[error("non-finite gradient in parameter `{param}`")]
    NonFiniteGradient { param: String },

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("character sequences differ between gold and prediction (sentence {index})")]
    CharMismatch { index: usize },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("sentence {index} has no domain tag")]
    Untagged { index: usize },

    #[error(transparent)]
    Load(#[from] LoadError),
}

/// Failures when reading a model file. Each corruption mode gets its own variant.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("not a model file (bad magic bytes)")]
    BadMagic,

    #[error("unsupported model format version {found} (this build reads {supported})")]
    Version { found: u16, supported: u16 },

    #[error("model file is truncated")]
    Truncated,

    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("malformed model header: {0}")]
    Header(String),
}
