use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("config line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("config line {line}: `{key}` expects {expected}, found `{found}`")]
    Type {
        line: usize,
        key: String,
        expected: &'static str,
        found: String,
    },

    #[error("config line {line}: `{key}` {message}")]
    Invalid { line: usize, key: String, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("cannot write outputs: {0}")]
    Output(String),

    #[error(transparent)]
    Core(#[from] pension_core::Error),
}

impl CliError {
    /// Process exit status: 1 for bad inputs, 2 for failures of the
    /// numerical pipeline.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_validation() => 2,
            CliError::Output(_) => 2,
            _ => 1,
        }
    }
}
