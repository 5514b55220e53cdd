use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use super::{DataError, Dataset};

/// Reads a numeric CSV; `target_column` (0-based) becomes the target and
/// every other column a feature, in file order.
///
/// Parse errors carry the 1-based file line and the 0-based column.
pub fn load_csv(path: &Path, target_column: usize, header: bool) -> Result<Dataset, DataError> {
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(file);

    let mut width: Option<usize> = None;
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(DataError::Ragged {
                line,
                expected: w,
                found: record.len(),
            });
        }
        if target_column >= w {
            return Err(DataError::TargetColumn {
                column: target_column,
                width: w,
            });
        }
        for (column, cell) in record.iter().enumerate() {
            let value: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| DataError::Parse {
                    line,
                    column,
                    value: cell.to_string(),
                })?;
            if column == target_column {
                targets.push(value);
            } else {
                features.push(value);
            }
        }
    }

    let w = width.ok_or(DataError::Empty)?;
    if w < 2 {
        return Err(DataError::Invalid(
            "need at least one feature column besides the target",
        ));
    }
    let n = targets.len();
    let features = Array2::from_shape_vec((n, w - 1), features)
        .map_err(|_| DataError::Invalid("feature matrix shape"))?;
    let name = path
        .file_stem()
        .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
    Dataset::new(name, features, targets)
}

/// Writes features followed by the target as the last column. Values use
/// the shortest representation that parses back to the same `f64`.
pub fn write_csv(ds: &Dataset, path: &Path, header: bool) -> Result<(), DataError> {
    let io = |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    if header {
        let mut cols: Vec<String> = (0..ds.num_features()).map(|j| format!("x{j}")).collect();
        cols.push("target".into());
        writeln!(out, "{}", cols.join(",")).map_err(io)?;
    }
    for (row, y) in ds.features().rows().into_iter().zip(ds.targets()) {
        let mut cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        cells.push(y.to_string());
        writeln!(out, "{}", cells.join(",")).map_err(io)?;
    }
    out.flush().map_err(io)
}
