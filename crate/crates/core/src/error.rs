use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("i/o error on {path}: {source}")]
    IoPath {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("not an archive: bad magic")]
    BadMagic,

    #[error("unsupported archive format version {0}")]
    UnsupportedVersion(u64),

    #[error("unknown final codec id {0:?}")]
    UnknownCodec(String),

    #[error("chunk {index}: CRC mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    ChunkCrc {
        index: usize,
        stored: u32,
        computed: u32,
    },

    #[error("corrupt archive: {0}")]
    Corrupt(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn corrupt(detail: impl Into<String>) -> Self {
        Error::Corrupt(detail.into())
    }

    /// Exit code mapping used by the command-line tool: 2 for i/o, 3 for
    /// corruption and verification failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::IoPath { .. } => 2,
            Error::Config(_) => 1,
            _ => 3,
        }
    }
}
