//! CSV ingestion.

use std::path::Path;

use grouprep_core::{build_dataset, Dataset};

use crate::error::{validation, CliError, Result};

/// Reads a comma-separated file with a header row. Feature cells are parsed
/// as `f64`; the group cell is taken verbatim. Rows in error messages are
/// file lines, the header being row 1.
pub fn load_csv(path: &Path, group_column: &str, feature_columns: &[String]) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(format!("cannot open {}", path.display()), e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let headers = match reader.headers() {
        Ok(h) if !h.is_empty() && !(h.len() == 1 && h[0].is_empty()) => h.clone(),
        Ok(_) => return Err(validation(format!("{} is empty", path.display()))),
        Err(e) => return Err(validation(format!("{}: {e}", path.display()))),
    };
    if feature_columns.is_empty() {
        return Err(validation("at least one feature column is needed"));
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| validation(format!("{}: no column named {name:?}", path.display())))
    };
    let group_idx = find(group_column)?;
    let feature_idx = feature_columns.iter().map(|c| find(c)).collect::<Result<Vec<_>>>()?;

    let mut points = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| validation(format!("{}: {e}", path.display())))?;
        let row = record.position().map_or(points.len() + 2, |p| p.line() as usize);
        let mut point = Vec::with_capacity(feature_idx.len());
        for (&i, name) in feature_idx.iter().zip(feature_columns) {
            let cell = record.get(i).unwrap_or("").trim();
            let x: f64 = cell.parse().map_err(|_| {
                validation(format!("{}: row {row}, column {name:?}: {cell:?} is not a number", path.display()))
            })?;
            point.push(x);
        }
        points.push(point);
        labels.push(record.get(group_idx).unwrap_or("").trim().to_string());
    }
    if points.is_empty() {
        return Err(validation(format!("{} has a header but no data rows", path.display())));
    }
    Ok(build_dataset(points, labels)?)
}

/// Writes `dataset` as CSV with columns `x0..x{d-1}` and `group`.
pub fn write_dataset_csv(dataset: &Dataset, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (0..dataset.dim()).map(|j| format!("x{j}")).collect();
    header.push("group".into());
    let io = |e: csv::Error| CliError::io("writing CSV", e.into());
    w.write_record(&header).map_err(io)?;
    for i in 0..dataset.len() {
        let mut row: Vec<String> = dataset.point(i).iter().map(|x| x.to_string()).collect();
        row.push(dataset.labels()[i].clone());
        w.write_record(&row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io("writing CSV", e))
}
