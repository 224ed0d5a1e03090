use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] randmat::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },
    #[error("unknown experiment {0:?}")]
    UnknownExperiment(String),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error("solver failure at stage {stage}: {detail}")]
    Failure { stage: String, detail: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
