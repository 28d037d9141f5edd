//! Layouts, datasets, field maps, and the solve cache on disk.

use thiserror::Error;

/// Storage failures.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse failure in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{path} declares units '{units}', expected meters")]
    UnitMismatch { path: String, units: String },

    #[error("field map grid in {path} is not rectilinear: {message}")]
    GridNotRectilinear { path: String, message: String },

    #[error("cache entry {key} is corrupt and was evicted")]
    CorruptEntry { key: String },
}
