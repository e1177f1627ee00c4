use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fewer than 4 reference dots could be matched ({matched} matched)")]
    MatchingDegenerate { matched: usize },

    #[error("degenerate dot geometry: {0}")]
    DegenerateGeometry(String),

    #[error("object is not in contact with the table")]
    NotInContact,

    #[error("F/T offset already captured; reset the sensor state first")]
    DoubleCapture,

    #[error("unsupported report format `{0}`")]
    UnsupportedFormat(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown object `{0}`")]
    UnknownObject(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
