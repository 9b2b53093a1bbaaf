use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The stationary problem has no unique solution.
    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Time integration blew up; reduce the step.
    #[error("step size too large: {0}")]
    StepSize(String),

    /// A normalized correlation whose denominator vanishes.
    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("sweep error: {0}")]
    Sweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag, used in CSV status columns and CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Degenerate(_) => "degenerate",
            Error::Numerical(_) => "numerical",
            Error::StepSize(_) => "step_size",
            Error::UndefinedCorrelation(_) => "undefined_correlation",
            Error::Fit(_) => "fit",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Sweep(_) => "sweep",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
