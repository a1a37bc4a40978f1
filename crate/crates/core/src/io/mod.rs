//! Dataset ingestion, synthetic generators, parameter presets, stream
//! replay and the benchmark harness.

mod bench;
mod dataset;
mod generate;
mod presets;
mod replay;

use thiserror::Error;

use crate::spatial::SpatialError;
use crate::stream::StreamError;

pub use bench::{
    format_table, run_benchmark, write_score_rows, BenchmarkConfig, DatasetSource, RunConfig,
    ScoreRow,
};
pub use dataset::{load_csv, min_max_normalize, read_csv, Dataset};
pub use generate::{generate, GeneratorSpec};
pub use presets::{analogue, preset, PRESET_NAMES};
pub use replay::{
    read_snapshots, replay_stream, write_snapshots, MetricsMode, ReplayOptions, ReplayOutcome,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("row {row}: cannot parse {value:?} as a number")]
    ParseError { row: usize, value: String },
    #[error("row {row}: expected {expected} fields, found {found}")]
    ArityMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset has no rows")]
    NoRows,
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed snapshot on line {line}: {message}")]
    Snapshot { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error(transparent)]
    Stream(#[from] StreamError),
}

impl IoError {
    /// Errors caused by parameters or configuration files, as opposed to
    /// the data being processed.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            IoError::InvalidSpec(_)
                | IoError::UnknownPreset(_)
                | IoError::Config(_)
                | IoError::Stream(StreamError::InvalidConfig(_))
        )
    }
}
