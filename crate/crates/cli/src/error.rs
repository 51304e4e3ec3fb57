use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure in {context}: {source}")]
    Numeric {
        context: String,
        #[source]
        source: gaussfisher_core::Error,
    },

    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },

    #[error("verification failed: {failed} of {total} checks out of tolerance")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 1,
            CliError::Numeric { .. } => 2,
            CliError::Verification { .. } => 3,
        }
    }

    pub(crate) fn numeric(context: impl Into<String>) -> impl FnOnce(gaussfisher_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Numeric { context, source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn config(message: impl Into<String>) -> CliError {
    CliError::Config(message.into())
}
