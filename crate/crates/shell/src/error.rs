use gsign_core::exprparse::ExprError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShellError {
    #[error("cannot parse {field} {input:?}: {source}")]
    Expr {
        field: &'static str,
        input: String,
        #[source]
        source: ExprError,
    },
    #[error("{what} = {value} exceeds the configured limit {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl ShellError {
    pub fn domain(e: impl std::fmt::Display) -> Self {
        ShellError::Domain(e.to_string())
    }

    /// 2 for malformed input, 1 for everything the numerics reject.
    pub fn exit_code(&self) -> i32 {
        match self {
            ShellError::Expr { .. } | ShellError::Usage(_) => 2,
            _ => 1,
        }
    }
}
