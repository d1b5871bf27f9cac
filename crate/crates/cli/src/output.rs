use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::CliError;

/// Files a command wants written, held back until the command has finished.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, path: Option<&PathBuf>, contents: impl FnOnce() -> String) {
        if let Some(p) = path {
            self.files.push((p.clone(), contents()));
        }
    }

    pub fn write_all(self) -> Result<(), CliError> {
        for (path, contents) in &self.files {
            write_atomic(path, contents)?;
        }
        Ok(())
    }
}

/// Write through a temporary file in the target directory and rename it
/// into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::file(path, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::file(path, e))?;
    tmp.persist(path).map_err(|e| CliError::file(path, e.error))?;
    Ok(())
}

pub fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
