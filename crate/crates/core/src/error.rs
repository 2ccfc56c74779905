use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("target coincides with antenna ({kind} {index}) at snapshot {snapshot}")]
    ZeroRange {
        kind: &'static str,
        index: usize,
        snapshot: usize,
    },

    #[error("infinite SNR: noise variance is zero")]
    InfiniteSnr,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("need at least {needed} snapshots, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("Fisher information is rank deficient (null-space dimension {null_dim} of {dim})")]
    RankDeficient { null_dim: usize, dim: usize },

    #[error("invalid search box: {0}")]
    InvalidBox(String),

    #[error("optimizer failed: {0}")]
    Optimizer(String),

    #[error("campaign failed: {0}")]
    Campaign(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed snapshot file: {0}")]
    SnapshotFormat(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
