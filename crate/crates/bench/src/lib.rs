//! Benchmark harness: runs the algorithm corpus under policy descriptors,
//! checks every run against a sequential oracle, and writes CSV records,
//! JSON-lines span logs and SVG span charts.

pub mod descriptor;
pub mod oracle;
pub mod report;
pub mod runner;
pub mod svg;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("{0}")]
    Usage(String),
    #[error("oracle mismatch: {0}")]
    Oracle(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Log {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl BenchError {
    /// Process exit status: 1 oracle failure, 2 usage, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Oracle(_) => 1,
            BenchError::Usage(_) => 2,
            BenchError::Io { .. } | BenchError::Log { .. } => 3,
        }
    }
}
