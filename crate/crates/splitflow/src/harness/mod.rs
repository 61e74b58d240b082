//! Experiment driver.
//!
//! Each command is a plain function returning structured records, so the
//! binary only parses arguments and writes files.

mod config;
mod ode;
mod run;
mod sweep;
mod table;
mod verify;

use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::continuous::ContinuousError;
use crate::discrete::DiscreteError;
use crate::objective::ObjectiveError;
use crate::schedule::ScheduleError;

pub use config::{parse_point, parse_schedule, RecordFlags, RunConfig};
pub use ode::{cmd_ode_compare, OdeCompareConfig, OdeCompareReport, OdeLevel};
pub use run::{cmd_run, energy_schedule, thresholds_for, RunArtifacts, RunSummary};
pub use sweep::{cmd_sweep, GridSpec, SweepCell};
pub use table::{builtin_rows, cmd_table, infer_step, TableRecord, TableRow, TableSettings};
pub use verify::{cmd_verify, Check, VerifyReport, SUITES};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Discrete(#[from] DiscreteError),
    #[error(transparent)]
    Continuous(#[from] ContinuousError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown algorithm '{0}'")]
    UnknownAlgorithm(String),
    #[error("unknown suite '{0}' (known: {known})", known = SUITES.join(", "))]
    UnknownSuite(String),
    #[error("a suite name is required (known: {known})", known = SUITES.join(", "))]
    EmptySuite,
    #[error("cannot read config: {0}")]
    ConfigParse(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

/// Round-trip float formatting for CSV cells (17 significant digits).
pub fn fmt_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

pub(crate) fn write_file(path: &std::path::Path, contents: &[u8]) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_path_buf(), source })?;
    }
    std::fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Serializes rows of already-formatted cells.
pub(crate) fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| HarnessError::Config(e.to_string()))
}
