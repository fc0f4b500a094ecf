use thiserror::Error;

/// Failure classes of a CLI run, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 3,
            CliError::Validation(_) => 4,
            CliError::Guard(_) => 5,
            CliError::Infeasible(_) => 6,
            CliError::Io(_) => 7,
        }
    }
}

impl From<lao_core::Error> for CliError {
    fn from(e: lao_core::Error) -> Self {
        use lao_core::Error as E;
        match e {
            // report hypotheses with the 1-based labels used on the command line
            E::NotDistinct {
                first,
                second,
                divergence,
            } => CliError::Validation(format!(
                "hypotheses {} and {} are not distinct (divergence {divergence:e})",
                first + 1,
                second + 1
            )),
            E::GuardExceeded(msg) => CliError::Guard(msg),
            E::EmptyRegion(msg) => CliError::Infeasible(msg),
            other => CliError::Validation(other.to_string()),
        }
    }
}
