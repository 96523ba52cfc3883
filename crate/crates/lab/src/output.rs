//! Writing reports to disk.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::report::ExperimentReport;

#[derive(Debug, Error)]
#[error("cannot write {}: {source}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    #[source]
    pub source: std::io::Error,
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf, OutputError> {
    fs::write(&path, contents).map_err(|source| OutputError {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes `<prefix>.csv` (the experiment's data table, when it has one),
/// `<prefix>.rows.csv` and `<prefix>.json` into `dir`, creating it if needed.
/// None of these files contain timing data.
pub fn write_report(report: &ExperimentReport, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    if let Some(table) = &report.table {
        written.push(write(dir.join(format!("{prefix}.csv")), &table.to_csv())?);
    }
    written.push(write(dir.join(format!("{prefix}.rows.csv")), &report.rows_table().to_csv())?);
    written.push(write(dir.join(format!("{prefix}.json")), &report.to_json())?);
    Ok(written)
}

/// Wall-clock metadata, kept out of the reproducible files.
pub fn write_timing(dir: &Path, prefix: &str, seconds: f64, workers: Option<usize>) -> Result<PathBuf, OutputError> {
    let body = serde_json::json!({
        "wall_clock_seconds": seconds,
        "workers": workers,
    });
    write(
        dir.join(format!("{prefix}.timing.json")),
        &format!("{}\n", serde_json::to_string_pretty(&body).expect("json")),
    )
}
