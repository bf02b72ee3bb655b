//! Shared command plumbing: failure classification mapped to exit codes,
//! document loading with line diagnostics, and atomic report writes.

use std::fmt;
use std::fs;
use std::path::Path;

use finocr_core::doc::DocumentFile;

/// Command failure, classified for the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// Malformed or missing input (exit 2).
    Input(String),
    /// The external generation service failed (exit 3).
    Service(String),
    /// Anything that should not happen (exit 4).
    Internal(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Input(m) | Failure::Service(m) | Failure::Internal(m) => f.write_str(m),
        }
    }
}

pub fn read_to_string(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

/// Load a document file, reporting the offending line and field on failure.
pub fn read_document(path: &Path) -> Result<DocumentFile, Failure> {
    let raw = read_to_string(path)?;
    DocumentFile::from_jsonl(&raw)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Write via a temp file in the destination directory plus rename, so a
/// failed run never leaves a truncated report behind.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)
            .map_err(|e| Failure::Internal(format!("cannot create {}: {e}", dir.display())))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    fs::write(tmp, bytes)
        .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(tmp, path)
        .map_err(|e| Failure::Internal(format!("cannot finalize {}: {e}", path.display())))?;
    Ok(())
}
