use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("I/O error: {0}")]
    Stream(#[from] io::Error),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("word never observed in any context (id {0})")]
    Unobserved(u32),

    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    #[error("vocabulary mismatch: expected checksum {expected:016x}, found {found:016x}")]
    VocabMismatch { expected: u64, found: u64 },

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("bad file format: {0}")]
    Format(String),

    #[error("non-finite value at epoch {epoch}, entry ({row}, {col}, x = {mass})")]
    NonFinite {
        epoch: usize,
        row: u32,
        col: u32,
        mass: f64,
    },

    #[error("undefined direction: zero vector")]
    ZeroVector,

    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),

    #[error("words not in vocabulary: {}", .0.join(", "))]
    MissingWords(Vec<String>),

    #[error("insufficient coverage: {0}")]
    Coverage(String),

    #[error("target sets differ in size ({x} vs {y})")]
    UnequalTargets { x: usize, y: usize },

    #[error("degenerate: no spread")]
    NoSpread,

    #[error("unknown word list '{name}'; valid ids: {}", valid.join(", "))]
    UnknownList { name: String, valid: Vec<String> },

    #[error("contingency table: {0}")]
    Table(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(source_name: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            message: message.into(),
        }
    }
}
