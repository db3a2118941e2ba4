use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// One measurement. Column order is fixed by the field order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub config: String,
    pub metric: String,
    pub value: f64,
    pub seed: Option<u64>,
    /// Wall time of the run that produced the row; the only column allowed
    /// to differ between identical runs.
    pub runtime_s: f64,
}

impl ResultRow {
    pub fn new(config: impl Into<String>, metric: &str, value: f64, seed: Option<u64>, runtime_s: f64) -> Self {
        Self { config: config.into(), metric: metric.to_string(), value, seed, runtime_s }
    }
}

/// Canonical order: by config, then seed; metrics keep their emission order.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.config.cmp(&b.config).then(a.seed.cmp(&b.seed)));
}

/// Writes `records` as CSV next to `path` and renames it into place, so the
/// destination holds either the previous file or the complete new one.
pub fn write_csv_atomic<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    {
        let mut w = csv::Writer::from_writer(tmp.as_file());
        for r in records {
            w.serialize(r).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Reads rows written by [`write_csv_atomic`]. An empty file or a bare
/// header yields no rows.
pub fn read_rows(path: &Path) -> Result<Vec<ResultRow>, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header_ok = match rdr.headers() {
        Ok(h) => h.is_empty() || h.iter().eq(["config", "metric", "value", "seed", "runtime_s"]),
        Err(e) => return Err(CliError::Usage(format!("{}: {e}", path.display()))),
    };
    if !header_ok {
        return Err(CliError::Usage(format!("{}: expected header config,metric,value,seed,runtime_s", path.display())));
    }
    rdr.deserialize().map(|r| r.map_err(|e: csv::Error| CliError::Usage(format!("{}: {e}", path.display())))).collect()
}
