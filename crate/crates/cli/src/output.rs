//! File formats: trajectory and sweep CSV, pretty JSON reports.

use std::fs;
use std::path::{Path, PathBuf};

use manakov_core::flows::Trajectory;
use serde::Serialize;

use crate::commands::SweepRow;
use crate::error::CliError;

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("cannot write {}: {e}", path.display()))
}

/// `file` under `dir` unless `file` is absolute; creates missing parent directories.
pub fn resolve(dir: &Path, file: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(file);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    Ok(path)
}

/// Header `time,m_0_1,m_0_2,...`, one row per recorded state (upper triangle, row-major).
pub fn trajectory_csv(traj: &Trajectory) -> Result<Vec<u8>, csv::Error> {
    let n = traj.states.first().map_or(0, |m| m.nrows());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["time".to_string()];
    for i in 0..n {
        for j in (i + 1)..n {
            header.push(format!("m_{i}_{j}"));
        }
    }
    w.write_record(&header)?;
    for (t, m) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![format!("{t:e}")];
        for i in 0..n {
            for j in (i + 1)..n {
                row.push(format!("{:e}", m[(i, j)]));
            }
        }
        w.write_record(&row)?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record(["n", "partition", "target", "verdict"])?;
    }
    Ok(w.into_inner().expect("in-memory writer"))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| io_error(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_error(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn write_csv(path: &Path, bytes: Result<Vec<u8>, csv::Error>) -> Result<(), CliError> {
    write_bytes(path, &bytes.map_err(|e| io_error(path, e))?)
}
