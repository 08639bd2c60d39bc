use std::path::Path;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failures grouped by how the command line reports them.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Data(_) => 2,
            Error::Numeric(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Data(_) => "data",
            Error::Numeric(_) => "numeric",
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Error::Data(format!("{}: {e}", path.display()))
    }
}

impl From<pugnn_core::Error> for Error {
    fn from(e: pugnn_core::Error) -> Self {
        use pugnn_core::Error as E;
        match e {
            E::Config(_) => Error::Config(e.to_string()),
            E::NonFinite(_) => Error::Numeric(e.to_string()),
            _ => Error::Data(e.to_string()),
        }
    }
}

impl From<pugnn_core::TrainFailure> for Error {
    fn from(f: pugnn_core::TrainFailure) -> Self {
        match Error::from(f.error.clone()) {
            Error::Config(_) => Error::Config(f.to_string()),
            Error::Data(_) => Error::Data(f.to_string()),
            Error::Numeric(_) => Error::Numeric(f.to_string()),
        }
    }
}
