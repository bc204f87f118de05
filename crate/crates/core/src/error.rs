use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: column `{0}` not found in header")]
    MissingColumn(String),

    #[error("parse error at data row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("partition error in stratum {stratum}: {msg}")]
    Partition { stratum: usize, msg: String },

    #[error("summary error: {0}")]
    Summary(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// Raised when a Gamma full conditional has a nonpositive shape or rate,
    /// which happens with the improper hazard prior and an empty cell.
    #[error(
        "degenerate full conditional for {param}[stratum {stratum}, interval {interval}] \
         (shape {shape}, rate {rate}); use a proper Gamma prior or merge intervals"
    )]
    DegenerateConditional {
        param: &'static str,
        stratum: usize,
        interval: usize,
        shape: f64,
        rate: f64,
    },

    #[error("sampler error: {0}")]
    Sampler(String),

    #[error("fitting error: {0}")]
    Fitting(String),

    #[error("elicitation error: {0}")]
    Elicitation(String),

    #[error("configuration error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error("design run aborted: {failed} of {trials} trials failed (limit {limit}); failed trial indices {indices:?} under seed {seed}")]
    DesignAborted {
        failed: usize,
        trials: usize,
        limit: usize,
        seed: u64,
        indices: Vec<u64>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for errors caused by bad input rather than by a computation
    /// failing at run time.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::MissingColumn(_)
                | Error::Parse { .. }
                | Error::InvalidData(_)
                | Error::Partition { .. }
                | Error::Summary(_)
                | Error::Config { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
