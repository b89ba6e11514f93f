// SPDX-License-Identifier: Apache-2.0

//! Scenario files, operator serialization, verification suites and report
//! formats around `clusterdyn-core`.

pub mod checks;
pub mod format;
pub mod random;
pub mod report;
pub mod scenario;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] clusterdyn_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
