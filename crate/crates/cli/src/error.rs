use thiserror::Error;

/// Failure classes, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(anomalykit::Error),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Solver(_) | CliError::Io { .. } => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<anomalykit::Error> for CliError {
    /// Input validation errors are configuration errors; the rest are
    /// numerical failures.
    fn from(e: anomalykit::Error) -> Self {
        use anomalykit::Error as E;
        match e {
            E::InvalidGrid(_)
            | E::InvalidInclusion(_)
            | E::InvalidCorner(_)
            | E::InvalidReaction(_)
            | E::InvalidParams(_)
            | E::Expression(_)
            | E::LayoutMismatch(_) => CliError::Config(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes() {
        assert_eq!(CliError::from(anomalykit::Error::LayoutMismatch("x".into())).exit_code(), 1);
        let e = anomalykit::Error::NewtonDivergence {
            iterations: 3,
            residual: 1.0,
        };
        assert_eq!(CliError::from(e).exit_code(), 2);
        assert_eq!(CliError::Verification("x".into()).exit_code(), 3);
    }
}
