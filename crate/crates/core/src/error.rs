use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("angle {value} is outside {expected}")]
    AngleOutOfRange { value: f64, expected: &'static str },

    #[error("vector ({x}, {y}) is not unit length")]
    NonUnitVector { x: f64, y: f64 },

    #[error("invalid walk spec: {0}")]
    InvalidWalkSpec(String),

    #[error("invalid limit spec: {0}")]
    InvalidLimitSpec(String),

    #[error("time {0} is outside [0, 1]")]
    TimeOutOfRange(f64),

    #[error("{0} requires a nonempty input")]
    EmptyInput(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("operation needs a {expected} realization, got {found}")]
    WrongKind {
        expected: &'static str,
        found: &'static str,
    },

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid seed `{0}`: expected decimal or 0x-prefixed hex")]
    InvalidSeed(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
