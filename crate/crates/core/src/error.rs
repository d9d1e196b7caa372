use thiserror::Error;

/// Errors raised by the estimation, exceedance and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter is outside its admissible range.
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// An argument (probability, count, support point) is outside the operation's domain.
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("degenerate summary: {0}")]
    DegenerateSummary(String),

    #[error("not enough data: {0}")]
    DataSize(String),

    #[error("ties at threshold: {0}")]
    Ties(String),

    /// The requested annual quantile lies below the threshold's own percentile.
    #[error("quantile below threshold: {0}")]
    QuantileBelowThreshold(String),

    #[error("truncation failed: {0}")]
    Truncation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
