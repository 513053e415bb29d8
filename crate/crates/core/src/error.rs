use thiserror::Error;

/// Errors produced anywhere in the trajectory pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed (singular system, no convergence).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Malformed text input.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A required key is absent from a key/value document.
    #[error("missing required key \"{0}\"")]
    MissingKey(String),

    /// A value parsed fine but violates a range or consistency rule.
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },

    /// Input the pipeline deliberately does not handle.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A lookup outside the valid range (e.g. time outside an animation path).
    #[error("out of range: {0}")]
    Range(String),

    /// A point cannot be projected onto the screen.
    #[error("projection error: {0}")]
    Projection(String),

    /// An operation was invoked in a state that does not support it.
    #[error("state error: {0}")]
    State(String),

    #[error("I/O error: {0}")]
    Io(String),

    /// An error attributed to a particular input file.
    #[error("{path}: {source}")]
    InFile { path: String, source: Box<Error> },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

impl Error {
    /// Attaches the name of the file the error came from.
    pub fn in_file(self, path: impl Into<String>) -> Self {
        Error::InFile {
            path: path.into(),
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
