use grouprep_core::CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, configuration or input data.
    #[error("{0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}{source}", prefix(context))]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

fn prefix(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!("{context}: ")
    }
}

impl CliError {
    /// 1 for input and validation problems, 2 for solver or invariant
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io { .. } => 1,
            CliError::Core { source, .. } if source.is_validation() => 1,
            CliError::Core { .. } => 2,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    /// Prefixes `cell` to the message of a core error.
    pub fn in_cell(self, cell: &str) -> Self {
        match self {
            CliError::Core { context, source } if context.is_empty() => CliError::Core {
                context: cell.to_string(),
                source,
            },
            CliError::Core { context, source } => CliError::Core {
                context: format!("{cell}: {context}"),
                source,
            },
            other => other,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(source: CoreError) -> Self {
        CliError::Core {
            context: String::new(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}
