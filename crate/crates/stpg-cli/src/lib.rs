//! Plumbing for the `stpg` binary: file formats, a small grid planner that
//! supplies benchmark plans, and the benchmark harness. The binary itself
//! only parses arguments and maps errors to exit codes.

pub mod bench;
pub mod formats;
pub mod planner;

use std::fmt;

/// What went wrong, carrying the process exit code: usage errors exit 1,
/// bad input files exit 2, and everything unexpected exits 4. (Exit 3 is
/// reserved for searches that time out, which is an outcome, not an error.)
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Validation(String),
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Internal(m) => m,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for Failure {}

/// Reads an input file, reporting absence or unreadability as input
/// validation (exit 2) rather than an internal fault.
pub fn read_input(path: &std::path::Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))
}

/// Writes an output file; failures here are environmental, exit 4.
pub fn write_output(path: &std::path::Path, content: &str) -> Result<(), Failure> {
    std::fs::write(path, content)
        .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))
}
