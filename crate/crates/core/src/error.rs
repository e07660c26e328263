use std::fmt;
use std::io;

/// Errors shared across the crate.
#[derive(Debug)]
pub enum Error {
    /// A caller violated an argument contract (bad level count, empty
    /// instance, malformed generator spec, ...).
    Usage(String),
    /// An instance file could not be parsed; `line` is 1-based.
    Parse { line: usize, message: String },
    Io(io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn usage(message: impl Into<String>) -> Error {
        Error::Usage(message.into())
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// True for errors a command-line front end should report as misuse
    /// (conventionally exit code 2) rather than runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_))
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Usage(message) => write!(f, "{message}"),
            Error::Parse { line, message } => write!(f, "line {line}: {message}"),
            Error::Io(err) => write!(f, "{err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Error {
        Error::Io(err)
    }
}
