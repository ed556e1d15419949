use std::fmt;
use std::path::Path;

use witsamp_core::Error;

/// Process exit status of a failed command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Usage = 1,
    Numerical = 2,
    Io = 3,
}

#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure {
            status: Status::Usage,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        Failure {
            status: Status::Numerical,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Failure {
            status: Status::Io,
            error: anyhow::Error::new(e).context(format!("cannot access {}", path.display())),
        }
    }

    pub fn context(mut self, what: impl fmt::Display + Send + Sync + 'static) -> Self {
        self.error = self.error.context(what);
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidInput(_) => Status::Usage,
            Error::Parse { .. } | Error::Io(_) => Status::Io,
            _ => Status::Numerical,
        };
        Failure {
            status,
            error: e.into(),
        }
    }
}

pub type Outcome<T = ()> = std::result::Result<T, Failure>;
