use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn file(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::File { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn input(path: &Path, e: impl std::fmt::Display) -> Self {
        Self::Input { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn numerical(e: impl std::fmt::Display) -> Self {
        Self::Numerical(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Numerical(_) => 2,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Self::Usage(_) => "usage",
            Self::File { .. } => "file",
            Self::Input { .. } => "input",
            Self::Numerical(_) => "numerical",
        }
    }

    pub fn report(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            status: &'a str,
            kind: &'a str,
            message: String,
        }
        let r = Report { status: "error", kind: self.kind(), message: self.to_string() };
        serde_json::to_string(&r).expect("error report serializes")
    }
}
