use std::fs;
use std::path::{Path, PathBuf};

use crate::envelope::{ResultEnvelope, Table};
use crate::error::{LabError, LabResult};

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io { path: path.to_path_buf(), source }
}

/// CSV with a header row, LF line endings and `f64` values in shortest round-trip form.
pub fn write_table(dir: &Path, table: &Table) -> LabResult<PathBuf> {
    let path = dir.join(format!("{}.csv", table.name));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path).map_err(|e| csv_error(&path, e))?;
    w.write_record(&table.header).map_err(|e| csv_error(&path, e))?;
    for row in &table.rows {
        w.write_record(row).map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(io(&path))?;
    Ok(path)
}

fn csv_error(path: &Path, e: csv::Error) -> LabError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => LabError::Io { path: path.to_path_buf(), source },
        other => LabError::Encode(format!("{}: {other:?}", path.display())),
    }
}

pub fn summary_json(envelope: &ResultEnvelope) -> LabResult<String> {
    serde_json::to_string_pretty(envelope).map(|s| s + "\n").map_err(|e| LabError::Encode(e.to_string()))
}

/// Writes every table plus `summary.json` into `dir`, recording the file names in the envelope.
pub fn write_all(dir: &Path, envelope: &mut ResultEnvelope, tables: &[Table]) -> LabResult<()> {
    fs::create_dir_all(dir).map_err(io(dir))?;
    envelope.files.clear();
    for t in tables {
        let path = write_table(dir, t)?;
        envelope.files.push(path.file_name().unwrap().to_string_lossy().into_owned());
    }
    envelope.files.push("summary.json".to_string());
    let path = dir.join("summary.json");
    fs::write(&path, summary_json(envelope)?).map_err(io(&path))
}
