use thiserror::Error;

/// Everything a command can fail with, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum Failure {
    /// A verdict, claim or hypothesis did not come out as expected.
    #[error("{0}")]
    Verdict(String),
    #[error("{0}")]
    Unknown(String),
    #[error("{0}")]
    Invalid(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Verdict(_) => 1,
            Failure::Unknown(_) => 2,
            Failure::Invalid(_) => 3,
        }
    }
}
