//! Plain delimited text: one sample per row, features first, the last
//! `label_count` columns are 0/1 labels. An optional header row is detected
//! by the presence of any non-numeric field in the first row.

use std::io::Write;
use std::path::Path;

use super::{dataset_name_from_path, MultiLabelDataset};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::multilabel::LabelMatrix;

fn delimiter_byte(delimiter: char) -> Result<u8> {
    if delimiter.is_ascii() && delimiter != '"' && delimiter != '\n' && delimiter != '\r' {
        Ok(delimiter as u8)
    } else {
        Err(Error::Input(format!("unsupported delimiter {delimiter:?}")))
    }
}

pub fn load_delimited(path: &Path, label_count: usize, delimiter: char) -> Result<MultiLabelDataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut ds = parse_delimited(&bytes, label_count, delimiter)?;
    ds.set_name(dataset_name_from_path(path));
    Ok(ds)
}

pub fn parse_delimited(bytes: &[u8], label_count: usize, delimiter: char) -> Result<MultiLabelDataset> {
    if label_count == 0 {
        return Err(Error::Input("label_count must be >= 1".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter_byte(delimiter)?)
        .from_reader(bytes);

    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (index, record) in reader.records().enumerate() {
        let line = index + 1;
        let record = record.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        if index == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(fields.iter().map(|s| s.to_string()).collect());
            width = Some(fields.len());
            continue;
        }
        let w = *width.get_or_insert(fields.len());
        if fields.len() != w {
            return Err(Error::Parse {
                line,
                msg: format!("row {line} has {} fields, expected {w}", fields.len()),
            });
        }
        if label_count >= w {
            return Err(Error::Input(format!(
                "label_count {label_count} leaves no features among {w} columns"
            )));
        }
        let split = w - label_count;
        for f in &fields[..split] {
            let v: f64 = f.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("'{f}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-finite value '{f}'"),
                });
            }
            features.push(v);
        }
        for f in &fields[split..] {
            labels.push(match f.parse::<f64>() {
                Ok(0.0) => 0,
                Ok(1.0) => 1,
                _ => return Err(Error::Format(format!("line {line}: label value '{f}' is not 0 or 1"))),
            });
        }
        rows += 1;
    }

    let w = width.unwrap_or(0);
    if label_count >= w {
        return Err(Error::Input(format!(
            "label_count {label_count} leaves no features among {w} columns"
        )));
    }
    let d = w - label_count;
    let (feature_names, label_names) = match header {
        Some(h) => (h[..d].to_vec(), h[d..].to_vec()),
        None => (
            (0..d).map(|j| format!("x{j}")).collect(),
            (0..label_count).map(|j| format!("y{j}")).collect(),
        ),
    };
    let x = DenseMatrix::new(rows, d, features)?;
    let y = LabelMatrix::new(rows, label_count, labels)?;
    MultiLabelDataset::new("dataset", x, y, feature_names, label_names)
}

/// Reads a label-free table: every column is a feature. Returns the matrix
/// and the column names (header row or `x0..`).
pub fn parse_features(bytes: &[u8], delimiter: char) -> Result<(DenseMatrix, Vec<String>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter_byte(delimiter)?)
        .from_reader(bytes);
    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut values = Vec::new();
    let mut rows = 0usize;
    for (index, record) in reader.records().enumerate() {
        let line = index + 1;
        let record = record.map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        let fields: Vec<&str> = record.iter().map(str::trim).collect();
        if index == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(fields.iter().map(|s| s.to_string()).collect());
            width = Some(fields.len());
            continue;
        }
        let w = *width.get_or_insert(fields.len());
        if fields.len() != w {
            return Err(Error::Parse {
                line,
                msg: format!("row {line} has {} fields, expected {w}", fields.len()),
            });
        }
        for f in &fields {
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        line,
                        msg: format!("'{f}' is not a finite number"),
                    })
                }
            }
        }
        rows += 1;
    }
    let w = width.unwrap_or(0);
    let names = header.unwrap_or_else(|| (0..w).map(|j| format!("x{j}")).collect());
    Ok((DenseMatrix::new(rows, w, values)?, names))
}

pub fn load_features(path: &Path, delimiter: char) -> Result<(DenseMatrix, Vec<String>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_features(&bytes, delimiter)
}

/// Writes a header row and one row per sample. Floats use the shortest
/// representation that parses back to the same bits.
pub fn write_delimited<W: Write>(dataset: &MultiLabelDataset, out: W, delimiter: char) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(delimiter_byte(delimiter)?)
        .from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(format!("write failed: {e}"));
    writer
        .write_record(dataset.feature_names().iter().chain(dataset.label_names()))
        .map_err(csv_err)?;
    let mut record = Vec::with_capacity(dataset.feature_count() + dataset.label_count());
    for i in 0..dataset.len() {
        record.clear();
        record.extend(dataset.features().row(i).iter().map(|v| v.to_string()));
        record.extend(dataset.labels().row(i).iter().map(|v| v.to_string()));
        writer.write_record(&record).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| Error::Format(format!("write failed: {e}")))
}

pub fn save_delimited(dataset: &MultiLabelDataset, path: &Path, delimiter: char) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_delimited(dataset, std::io::BufWriter::new(file), delimiter)
}
