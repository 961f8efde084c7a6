use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] realgas::Error),
}

impl CliError {
    /// 2 input/domain, 3 convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        use realgas::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Io(_) => 4,
            CliError::Core(e) => match e {
                E::Convergence { .. } | E::Quadrature { .. } => 3,
                _ => 2,
            },
        }
    }
}
