use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad input: schema, domain or dimension errors.
    #[error("{0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) | CliError::Numerical(_) => 1,
        }
    }
}

impl From<steinlab::Error> for CliError {
    fn from(e: steinlab::Error) -> Self {
        match e {
            steinlab::Error::Quadrature(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}
