use std::fmt;
use std::fs::File;
use std::io;
use std::path::Path;
use std::str::FromStr;

use super::Dataset;
use crate::error::{Error, Result};

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Pure digits select a zero-based index; anything else is a header name.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(n) => f.write_str(n),
            LabelColumn::Index(i) => write!(f, "{i}"),
        }
    }
}

/// Loads a two-class dataset from a CSV file.
///
/// Rows labelled with neither `positive_class` nor `negative_class` are
/// dropped. The first row is treated as a header when the label column is
/// given by name, or when any of its feature cells is not a number.
pub fn load_csv(
    path: impl AsRef<Path>,
    label_column: &LabelColumn,
    positive_class: &str,
    negative_class: &str,
) -> Result<Dataset> {
    let path = path.as_ref();
    let ingest = |message: String| Error::Ingest {
        path: path.to_path_buf(),
        message,
    };
    if positive_class == negative_class {
        return Err(Error::invalid(format!(
            "positive and negative class are both '{positive_class}'"
        )));
    }

    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| ingest(e.to_string()))?;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        records.push(rec);
    }
    let first = records
        .first()
        .ok_or_else(|| ingest("file is empty".into()))?;
    let width = first.len();

    let by_name = |name: &str| first.iter().position(|h| h == name);
    let (label_idx, named) = match label_column {
        LabelColumn::Name(name) => (
            by_name(name).ok_or_else(|| ingest(format!("no column named '{name}'")))?,
            true,
        ),
        LabelColumn::Index(i) if *i < width => (*i, false),
        LabelColumn::Index(i) => {
            return Err(ingest(format!(
                "label column {i} out of range for {width} columns"
            )))
        }
    };
    if width < 2 {
        return Err(ingest(
            "need at least one feature column besides the label".into(),
        ));
    }
    let has_header = named
        || first
            .iter()
            .enumerate()
            .any(|(j, cell)| j != label_idx && cell.parse::<f64>().is_err());

    let feature_names: Option<Vec<String>> = has_header.then(|| {
        first
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != label_idx)
            .map(|(_, h)| h.to_string())
            .collect()
    });

    let d = width - 1;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let body_start = usize::from(has_header);
    for (row, rec) in records.iter().enumerate().skip(body_start) {
        // 1-based line number for messages.
        let line = row + 1;
        if rec.len() != width {
            return Err(ingest(format!(
                "line {line} has {} fields, expected {width}",
                rec.len()
            )));
        }
        let label = match &rec[label_idx] {
            l if l == positive_class => 1,
            l if l == negative_class => -1,
            _ => continue,
        };
        for (j, cell) in rec.iter().enumerate() {
            if j == label_idx {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                ingest(format!(
                    "line {line}, column {}: cannot parse '{cell}' as a number",
                    j + 1
                ))
            })?;
            if !v.is_finite() {
                return Err(ingest(format!(
                    "line {line}, column {}: non-finite value",
                    j + 1
                )));
            }
            features.push(v);
        }
        labels.push(label);
    }

    for (class, want) in [(positive_class, 1), (negative_class, -1)] {
        if !labels.contains(&want) {
            return Err(ingest(format!(
                "no rows with label '{class}' in column {label_column}"
            )));
        }
    }

    let data = Dataset::from_flat(features, d, labels)?;
    match feature_names {
        Some(names) => data.with_feature_names(names),
        None => Ok(data),
    }
}

/// Writes features followed by a `label` column holding `1` / `-1`.
pub fn write_csv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv_to(data, file)
}

/// [`write_csv`] to an arbitrary writer.
pub fn write_csv_to(data: &Dataset, out: impl io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let names: Vec<String> = match data.feature_names() {
        Some(n) => n.to_vec(),
        None => (0..data.n_features()).map(|j| format!("x{j}")).collect(),
    };
    w.write_record(names.iter().map(String::as_str).chain(["label"]))?;
    for (x, y) in data.rows().zip(data.labels()) {
        let mut rec: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
        rec.push(y.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}
