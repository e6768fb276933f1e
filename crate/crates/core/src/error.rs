use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{}: county table has no data rows", path.display())]
    EmptyTable { path: PathBuf },

    #[error("row {row}, field `{field}`: {reason}")]
    InvalidValue {
        row: usize,
        field: &'static str,
        reason: String,
    },

    #[error("no site of kind {kind} to choose from")]
    NoStoreOfKind { kind: &'static str },

    #[error("county {county}: no site of kind {kind}")]
    MissingSites { county: u16, kind: &'static str },

    #[error("county {county}: {households} households, need at least {needed} for friend lists")]
    TooFewHouseholds {
        county: u16,
        households: usize,
        needed: usize,
    },

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParam { key: &'static str, reason: String },

    #[error("{}`{key}`: {reason}", if *line == 0 { String::new() } else { format!("line {line}: ") })]
    Config {
        line: usize,
        key: String,
        reason: String,
    },

    #[error("snapshot {file}, row {row}: {reason}")]
    Snapshot {
        file: &'static str,
        row: usize,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(key: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            key,
            reason: reason.into(),
        }
    }

    /// True for failures of the filesystem rather than of the input's content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::Csv { source, .. } => source.is_io_error(),
            _ => false,
        }
    }
}
