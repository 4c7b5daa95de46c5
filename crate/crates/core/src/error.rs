use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology parameters: {0}")]
    InvalidTopology(String),

    #[error("node {0} out of range (n = {1})")]
    NodeOutOfRange(usize, usize),

    #[error("beam width {0} rad outside (0, 2pi]")]
    InvalidBeamWidth(f64),

    #[error("empty beam width candidate list")]
    NoCandidates,

    #[error("{configs} antenna configs for {nodes} nodes")]
    ConfigLengthMismatch { configs: usize, nodes: usize },

    #[error("graph has no reachable ordered pair")]
    EmptyGraph,

    #[error("degenerate fit input: {0}")]
    DegenerateFit(String),

    #[error("invalid traffic parameters: {0}")]
    InvalidTraffic(String),

    #[error("invalid experiment config: {0}")]
    Config(String),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("empty results table")]
    EmptyTable,

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
