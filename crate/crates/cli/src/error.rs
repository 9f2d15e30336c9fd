use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("{context}: {source}")]
    Physics {
        context: String,
        #[source]
        source: tprf_core::Error,
    },

    #[error("cannot write {path}: {source}")]
    Output {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn physics(context: impl Into<String>) -> impl FnOnce(tprf_core::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Physics { context, source }
    }

    /// 2 for configuration problems, 3 for physics or solver failures, 1 for
    /// output I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Physics { .. } => 3,
            CliError::Output { .. } => 1,
        }
    }
}
