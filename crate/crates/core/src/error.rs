use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad or inconsistent input data.
    Data,
    /// A numerical routine failed or produced a non-finite value.
    Numerical,
    /// Invalid parameters or configuration.
    Usage,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: {message}")]
    BadField {
        row: usize,
        column: String,
        message: String,
    },

    #[error("duplicate row for player `{player}` season {season} (row {row})")]
    DuplicateKey {
        player: String,
        season: i32,
        row: usize,
    },

    #[error("metric `{metric}`: no usable player-seasons ({dropped} dropped)")]
    EmptyPanel { metric: String, dropped: usize },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("{0}")]
    InvalidData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration {iteration}: {message}")]
    Chain { iteration: usize, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter(_) => ErrorKind::Usage,
            Error::Chain { .. } | Error::Numerical(_) => ErrorKind::Numerical,
            _ => ErrorKind::Data,
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
