use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed problem document: {0}")]
    Malformed(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("unknown builtin problem `{0}`")]
    UnknownBuiltin(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cycle too short: n = {n}, need at least {min}")]
    CycleTooShort { n: usize, min: usize },
    #[error("grid too small: n = {n}, need at least {min}")]
    GridTooSmall { n: usize, min: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid anchor set: {0}")]
    InvalidAnchors(String),
    #[error("window {0} is missing from the lookup table")]
    MissingTile(String),
    #[error("instance of {cells} cells exceeds the brute-force guard of {guard}")]
    OracleGuard { cells: usize, guard: usize },
    #[error("solver backend `{backend}` failed: {reason}")]
    Backend { backend: String, reason: String },
    #[error("unknown solver backend `{0}`")]
    UnknownBackend(String),
    #[error("unknown symmetry-breaking strategy `{0}`")]
    UnknownStrategy(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
