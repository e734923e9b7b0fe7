//! ARFF reader/writer following the MULAN/KEEL multi-label convention: the
//! label attributes are a contiguous block of `{0,1}` attributes at the end
//! (or start) of the attribute list.

use std::fmt::Write as _;
use std::path::Path;

use super::{dataset_name_from_path, MultiLabelDataset};
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::multilabel::LabelMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelPosition {
    #[default]
    End,
    Start,
}

#[derive(Debug, Clone, PartialEq)]
enum AttrType {
    Numeric,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone)]
struct Attribute {
    name: String,
    kind: AttrType,
}

impl Attribute {
    /// Binary `{0,1}` nominals are kept as a single 0/1 column.
    fn is_binary_nominal(&self) -> bool {
        match &self.kind {
            AttrType::Nominal(values) => {
                let mut v: Vec<&str> = values.iter().map(String::as_str).collect();
                v.sort_unstable();
                v == ["0", "1"]
            }
            AttrType::Numeric => false,
        }
    }
}

pub fn load_arff(path: &Path, label_count: usize, position: LabelPosition) -> Result<MultiLabelDataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    let mut ds = parse_arff(&text, label_count, position)?;
    ds.set_name(dataset_name_from_path(path));
    Ok(ds)
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn starts_with_keyword(line: &str, kw: &str) -> bool {
    line.len() >= kw.len()
        && line[..kw.len()].eq_ignore_ascii_case(kw)
        && line[kw.len()..].chars().next().is_none_or(char::is_whitespace)
}

/// Reads a possibly quoted token; returns (token, rest).
fn read_token(s: &str) -> Option<(String, &str)> {
    let s = s.trim_start();
    let mut chars = s.char_indices();
    let (_, first) = chars.next()?;
    if first == '\'' || first == '"' {
        let mut out = String::new();
        let mut escaped = false;
        for (i, c) in chars {
            if escaped {
                out.push(c);
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == first {
                return Some((out, &s[i + 1..]));
            } else {
                out.push(c);
            }
        }
        None
    } else {
        let end = s.find(char::is_whitespace).unwrap_or(s.len());
        Some((s[..end].to_string(), &s[end..]))
    }
}

fn unquote(s: &str) -> String {
    let s = s.trim();
    if s.len() >= 2 && ((s.starts_with('\'') && s.ends_with('\'')) || (s.starts_with('"') && s.ends_with('"'))) {
        s[1..s.len() - 1].replace("\\'", "'").replace("\\\"", "\"")
    } else {
        s.to_string()
    }
}

/// Splits on commas outside quotes.
fn split_fields(s: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut escaped = false;
    for c in s.chars() {
        if escaped {
            cur.push(c);
            escaped = false;
            continue;
        }
        match (quote, c) {
            (_, '\\') => {
                cur.push(c);
                escaped = true;
            }
            (Some(q), c) if c == q => {
                quote = None;
                cur.push(c);
            }
            (None, '\'' | '"') => {
                quote = Some(c);
                cur.push(c);
            }
            (None, ',') => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

fn parse_attribute(rest: &str, line: usize) -> Result<Attribute> {
    let (name, kind) = read_token(rest).ok_or_else(|| parse_err(line, "attribute without a name"))?;
    let kind = kind.trim();
    if kind.starts_with('{') {
        let close = kind.rfind('}').ok_or_else(|| parse_err(line, "unterminated nominal value list"))?;
        let values: Vec<String> = split_fields(&kind[1..close])
            .iter()
            .map(|v| unquote(v))
            .filter(|v| !v.is_empty())
            .collect();
        if values.is_empty() {
            return Err(parse_err(line, format!("nominal attribute '{name}' has no values")));
        }
        return Ok(Attribute {
            name,
            kind: AttrType::Nominal(values),
        });
    }
    let ty = kind.split_whitespace().next().unwrap_or("").to_ascii_lowercase();
    match ty.as_str() {
        "numeric" | "real" | "integer" => Ok(Attribute {
            name,
            kind: AttrType::Numeric,
        }),
        "" => Err(parse_err(line, format!("attribute '{name}' has no type"))),
        other => Err(parse_err(line, format!("unsupported attribute type '{other}' for '{name}'"))),
    }
}

/// Parses ARFF text. The last (or first) `label_count` attributes become the
/// label matrix; numeric attributes become feature columns, binary `{0,1}`
/// nominals a single 0/1 column, and other nominals are one-hot expanded.
/// Missing feature values (`?`) are replaced by the column mean.
pub fn parse_arff(text: &str, label_count: usize, position: LabelPosition) -> Result<MultiLabelDataset> {
    if label_count == 0 {
        return Err(Error::Input("label_count must be >= 1".into()));
    }
    let mut relation = String::from("dataset");
    let mut attrs: Vec<Attribute> = Vec::new();
    let mut lines = text.lines().enumerate();
    let mut saw_data = false;
    for (i, raw) in lines.by_ref() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if starts_with_keyword(line, "@relation") {
            if let Some((name, _)) = read_token(&line["@relation".len()..]) {
                relation = name;
            }
        } else if starts_with_keyword(line, "@attribute") {
            attrs.push(parse_attribute(&line["@attribute".len()..], line_no)?);
        } else if starts_with_keyword(line, "@data") {
            saw_data = true;
            break;
        } else {
            return Err(parse_err(line_no, format!("unexpected header line '{line}'")));
        }
    }
    if !saw_data {
        return Err(parse_err(text.lines().count().max(1), "missing @data section"));
    }
    if label_count >= attrs.len() {
        return Err(Error::Input(format!(
            "label_count {label_count} leaves no features among {} attributes",
            attrs.len()
        )));
    }

    let n_attr = attrs.len();
    let label_range = match position {
        LabelPosition::End => n_attr - label_count..n_attr,
        LabelPosition::Start => 0..label_count,
    };
    for a in &attrs[label_range.clone()] {
        if let AttrType::Nominal(values) = &a.kind {
            if let Some(bad) = values.iter().find(|v| v.as_str() != "0" && v.as_str() != "1") {
                return Err(Error::Format(format!(
                    "label attribute '{}' declares value '{bad}', expected only 0/1",
                    a.name
                )));
            }
        }
    }

    // feature column layout
    let mut feature_names = Vec::new();
    // per attribute: first output column (features) or label index
    let mut column_of = vec![0usize; n_attr];
    let mut source_features = 0;
    for (k, a) in attrs.iter().enumerate() {
        if label_range.contains(&k) {
            column_of[k] = k - label_range.start;
            continue;
        }
        source_features += 1;
        column_of[k] = feature_names.len();
        match &a.kind {
            AttrType::Nominal(values) if !a.is_binary_nominal() => {
                for v in values {
                    feature_names.push(format!("{}={}", a.name, v));
                }
            }
            _ => feature_names.push(a.name.clone()),
        }
    }
    let d = feature_names.len();
    let label_names: Vec<String> = attrs[label_range.clone()].iter().map(|a| a.name.clone()).collect();

    let mut features: Vec<f64> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    let mut row_values: Vec<Option<String>> = vec![None; n_attr];
    let mut rows = 0usize;

    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        row_values.iter_mut().for_each(|v| *v = None);
        if let Some(body) = line.strip_prefix('{') {
            let close = body.find('}').ok_or_else(|| parse_err(line_no, "unterminated sparse row"))?;
            let body = body[..close].trim();
            if !body.is_empty() {
                for entry in split_fields(body) {
                    let entry = entry.trim();
                    let (idx, value) = entry
                        .split_once(char::is_whitespace)
                        .ok_or_else(|| parse_err(line_no, format!("sparse entry '{entry}' lacks a value")))?;
                    let idx: usize = idx
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad sparse index '{idx}'")))?;
                    if idx >= n_attr {
                        return Err(parse_err(line_no, format!("sparse index {idx} out of range")));
                    }
                    row_values[idx] = Some(unquote(value));
                }
            }
        } else {
            let fields = split_fields(line);
            if fields.len() != n_attr {
                return Err(parse_err(
                    line_no,
                    format!("expected {n_attr} values, found {}", fields.len()),
                ));
            }
            for (slot, f) in row_values.iter_mut().zip(fields) {
                *slot = Some(unquote(&f));
            }
        }

        let mut frow = vec![0.0; d];
        let mut lrow = vec![0u8; label_count];
        for (k, a) in attrs.iter().enumerate() {
            // absent sparse entries mean numeric 0 or the first nominal value
            let value = row_values[k].as_deref();
            if label_range.contains(&k) {
                let v = match (value, &a.kind) {
                    (None, AttrType::Nominal(vals)) => vals[0].as_str(),
                    (None, AttrType::Numeric) => "0",
                    (Some(v), _) => v,
                };
                lrow[column_of[k]] = match v.trim() {
                    "0" | "0.0" => 0,
                    "1" | "1.0" => 1,
                    other => {
                        return Err(Error::Format(format!(
                            "line {line_no}: label '{}' has value '{other}', expected 0 or 1",
                            a.name
                        )))
                    }
                };
                continue;
            }
            let col = column_of[k];
            match &a.kind {
                AttrType::Numeric => {
                    frow[col] = match value.map(str::trim) {
                        None => 0.0,
                        Some("?") => f64::NAN,
                        Some(v) => {
                            let x: f64 = v
                                .parse()
                                .map_err(|_| parse_err(line_no, format!("'{v}' is not numeric for '{}'", a.name)))?;
                            if !x.is_finite() {
                                return Err(parse_err(line_no, format!("non-finite value for '{}'", a.name)));
                            }
                            x
                        }
                    }
                }
                AttrType::Nominal(values) => {
                    let v = value.map(str::trim).unwrap_or(values[0].as_str());
                    if v == "?" {
                        let width = if a.is_binary_nominal() { 1 } else { values.len() };
                        frow[col..col + width].iter_mut().for_each(|c| *c = f64::NAN);
                        continue;
                    }
                    let pos = values
                        .iter()
                        .position(|x| x == v)
                        .ok_or_else(|| parse_err(line_no, format!("'{v}' is not a declared value of '{}'", a.name)))?;
                    if a.is_binary_nominal() {
                        frow[col] = values[pos].parse().expect("binary nominal value");
                    } else {
                        frow[col + pos] = 1.0;
                    }
                }
            }
        }
        features.extend(frow);
        labels.extend(lrow);
        rows += 1;
    }

    impute_column_means(&mut features, d);
    let x = DenseMatrix::new(rows, d, features)?;
    let y = LabelMatrix::new(rows, label_count, labels)?;
    MultiLabelDataset::with_source_count(relation, x, y, feature_names, label_names, source_features)
}

fn impute_column_means(values: &mut [f64], d: usize) {
    if d == 0 || !values.iter().any(|v| v.is_nan()) {
        return;
    }
    let mut sum = vec![0.0; d];
    let mut count = vec![0usize; d];
    for row in values.chunks_exact(d) {
        for (j, &v) in row.iter().enumerate() {
            if !v.is_nan() {
                sum[j] += v;
                count[j] += 1;
            }
        }
    }
    let mean: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(&s, &c)| if c == 0 { 0.0 } else { s / c as f64 })
        .collect();
    for row in values.chunks_exact_mut(d) {
        for (j, v) in row.iter_mut().enumerate() {
            if v.is_nan() {
                *v = mean[j];
            }
        }
    }
}

fn quote_name(name: &str) -> String {
    if name.is_empty() || name.contains(|c: char| c.is_whitespace() || ",{}'\"%".contains(c)) {
        format!("'{}'", name.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        name.to_string()
    }
}

/// Writes a dense ARFF file: numeric features followed by `{0,1}` labels.
pub fn save_arff(dataset: &MultiLabelDataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    let _ = writeln!(out, "@relation {}", quote_name(dataset.name()));
    out.push('\n');
    for name in dataset.feature_names() {
        let _ = writeln!(out, "@attribute {} numeric", quote_name(name));
    }
    for name in dataset.label_names() {
        let _ = writeln!(out, "@attribute {} {{0,1}}", quote_name(name));
    }
    out.push_str("\n@data\n");
    for i in 0..dataset.len() {
        let mut first = true;
        for v in dataset.features().row(i) {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        for &l in dataset.labels().row(i) {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{l}");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}
