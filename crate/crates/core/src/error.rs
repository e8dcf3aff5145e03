use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid incident field: {0}")]
    InvalidIncident(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("singular modal system at n = {n}, omega = {omega}")]
    SingularSystem { n: usize, omega: f64 },
    #[error("quadrature failed: {0}")]
    QuadratureFailure(String),
    #[error("synthesis plan expects {expected} samples, got {got}")]
    PlanMismatch { expected: usize, got: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code: 2 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SingularSystem { .. } | Error::QuadratureFailure(_) => 2,
            _ => 1,
        }
    }
}
