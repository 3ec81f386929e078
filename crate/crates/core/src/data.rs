//! Labeled tabular datasets and CSV ingestion.
//!
//! Columns whose non-missing values all parse as numbers are numeric; every
//! other column is categorical. `?` and empty fields are missing values.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use log::warn;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureKind {
    Numeric,
    Categorical { levels: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
}

impl Feature {
    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric,
        }
    }
}

/// One feature value; categorical values index into the feature's levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Cat(u32),
    Missing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    features: Vec<Feature>,
    rows: Vec<Vec<Cell>>,
    labels: Vec<usize>,
    classes: Vec<String>,
    dropped_columns: Vec<String>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Vec<Feature>,
        rows: Vec<Vec<Cell>>,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        let name = name.into();
        if rows.len() != labels.len() {
            return Err(Error::Data(format!(
                "{name}: {} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != features.len()) {
            return Err(Error::Data(format!(
                "{name}: row {i} has {} cells, schema has {}",
                rows[i].len(),
                features.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l >= classes.len()) {
            return Err(Error::Data(format!("{name}: row {i} has an unknown label")));
        }
        let mut seen = vec![false; classes.len()];
        labels.iter().for_each(|&l| seen[l] = true);
        if seen.iter().filter(|&&s| s).count() < 2 {
            return Err(Error::Data(format!(
                "{name}: need at least 2 distinct classes"
            )));
        }
        Ok(Self {
            name,
            features,
            rows,
            labels,
            classes,
            dropped_columns: Vec::new(),
        })
    }

    /// All-numeric dataset from a feature matrix; labels index `classes`.
    pub fn from_numeric(
        name: impl Into<String>,
        x: Vec<Vec<f64>>,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        let width = x.first().map_or(0, Vec::len);
        let features = (0..width)
            .map(|j| Feature::numeric(format!("x{j}")))
            .collect();
        let rows = x
            .into_iter()
            .map(|r| r.into_iter().map(Cell::Num).collect())
            .collect();
        Self::new(name, features, rows, labels, classes)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Columns removed at load time because every value was missing.
    pub fn dropped_columns(&self) -> &[String] {
        &self.dropped_columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        self.labels.iter().for_each(|&l| counts[l] += 1);
        counts
    }

    /// Accuracy of always predicting the most frequent class.
    pub fn majority_rate(&self) -> f64 {
        let top = self.class_counts().into_iter().max().unwrap_or(0);
        top as f64 / self.len().max(1) as f64
    }

    /// Rows at `indices`, keeping the full schema and class list.
    ///
    /// Unlike [`Dataset::new`] this does not require two classes to be
    /// present, since test folds may be single-class.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            features: self.features.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            dropped_columns: self.dropped_columns.clone(),
        }
    }
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field == "?"
}

fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") => b'\t',
        _ => b',',
    }
}

/// Name of the last header column, the conventional label position.
pub fn last_column(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter_for(path))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let header = csv
        .headers()
        .map_err(|e| Error::Data(format!("{}: unreadable header: {e}", path.display())))?;
    header
        .iter()
        .next_back()
        .map(str::to_string)
        .ok_or_else(|| Error::Data(format!("{}: empty header", path.display())))
}

/// Loads a delimiter-separated file with a header row. The delimiter is
/// inferred from the extension (`.tsv` → tab, otherwise comma).
pub fn load_dataset(path: impl AsRef<Path>, label_column: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?;
    let delimiter = delimiter_for(path);
    let name = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("dataset")
        .to_string();
    parse_dataset(name, file, delimiter, label_column)
}

pub fn parse_dataset<R: Read>(
    name: impl Into<String>,
    reader: R,
    delimiter: u8,
    label_column: &str,
) -> Result<Dataset> {
    let name = name.into();
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = csv
        .headers()
        .map_err(|e| Error::Data(format!("{name}: unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            Error::Data(format!(
                "{name}: label column `{label_column}` not found; available columns: {}",
                header.join(", ")
            ))
        })?;

    let mut raw: Vec<Vec<String>> = Vec::new();
    for (i, record) in csv.records().enumerate() {
        // Row numbers count the header as line 1.
        let line = i + 2;
        let record = record.map_err(|e| Error::Data(format!("{name}: line {line}: {e}")))?;
        if record.len() != header.len() {
            return Err(Error::Data(format!(
                "{name}: line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        if is_missing(&record[label_idx]) {
            return Err(Error::Data(format!(
                "{name}: line {line}: missing class label"
            )));
        }
        raw.push(record.iter().map(str::to_string).collect());
    }
    if raw.is_empty() {
        return Err(Error::Data(format!("{name}: no data rows")));
    }

    let mut classes: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    let labels: Vec<usize> = raw
        .iter()
        .map(|r| {
            let label = &r[label_idx];
            *class_index.entry(label.clone()).or_insert_with(|| {
                classes.push(label.clone());
                classes.len() - 1
            })
        })
        .collect();
    if classes.len() < 2 {
        return Err(Error::Data(format!(
            "{name}: single-class dataset (only `{}`)",
            classes[0]
        )));
    }

    let mut features = Vec::new();
    let mut columns: Vec<Vec<Cell>> = Vec::new();
    let mut dropped = Vec::new();
    for (j, col_name) in header.iter().enumerate() {
        if j == label_idx {
            continue;
        }
        let values: Vec<&str> = raw.iter().map(|r| r[j].as_str()).collect();
        if values.iter().all(|v| is_missing(v)) {
            warn!("{name}: column `{col_name}` has no values, dropping it");
            dropped.push(col_name.clone());
            continue;
        }
        let numeric: Option<Vec<Cell>> = values
            .iter()
            .map(|v| {
                if is_missing(v) {
                    Some(Cell::Missing)
                } else {
                    v.parse::<f64>()
                        .ok()
                        .filter(|x| x.is_finite())
                        .map(Cell::Num)
                }
            })
            .collect();
        let (kind, cells) = match numeric {
            Some(cells) => (FeatureKind::Numeric, cells),
            None => {
                let mut levels: Vec<String> = Vec::new();
                let mut lookup: HashMap<&str, u32> = HashMap::new();
                let cells = values
                    .iter()
                    .map(|&v| {
                        if is_missing(v) {
                            Cell::Missing
                        } else {
                            Cell::Cat(*lookup.entry(v).or_insert_with(|| {
                                levels.push(v.to_string());
                                (levels.len() - 1) as u32
                            }))
                        }
                    })
                    .collect();
                (FeatureKind::Categorical { levels }, cells)
            }
        };
        features.push(Feature {
            name: col_name.clone(),
            kind,
        });
        columns.push(cells);
    }

    let rows = (0..raw.len())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    let mut dataset = Dataset::new(name, features, rows, labels, classes)?;
    dataset.dropped_columns = dropped;
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, label: &str) -> Result<Dataset> {
        parse_dataset("t", text.as_bytes(), b',', label)
    }

    #[test]
    fn numeric_categorical_and_missing() {
        let d = parse("a,b,c,y\n1,red,?,p\n2.5,blue,3,q\n,red,4,p\n", "y").unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.classes(), ["p", "q"]);
        assert_eq!(d.labels(), [0, 1, 0]);
        assert_eq!(d.features()[0].kind, FeatureKind::Numeric);
        assert_eq!(
            d.features()[1].kind,
            FeatureKind::Categorical {
                levels: vec!["red".into(), "blue".into()]
            }
        );
        assert_eq!(
            d.rows()[0],
            vec![Cell::Num(1.0), Cell::Cat(0), Cell::Missing]
        );
        assert_eq!(d.rows()[2][0], Cell::Missing);
    }

    #[test]
    fn all_missing_column_is_dropped() {
        let d = parse("a,gone,y\n1,?,p\n2,,q\n", "y").unwrap();
        assert_eq!(d.features().len(), 1);
        assert_eq!(d.dropped_columns(), ["gone"]);
    }

    #[test]
    fn missing_label_column_lists_available() {
        let err = parse("a,b\n1,2\n", "class").unwrap_err();
        let Error::Data(msg) = err else { panic!() };
        assert!(msg.contains("a, b"), "{msg}");
    }

    #[test]
    fn ragged_row_reports_line() {
        let err = parse("a,y\n1,p\n2\n", "y").unwrap_err();
        let Error::Data(msg) = err else { panic!() };
        assert!(msg.contains("line 3"), "{msg}");
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(parse("a,y\n1,p\n2,p\n", "y"), Err(Error::Data(_))));
    }

    #[test]
    fn unlabeled_row_rejected() {
        let err = parse("a,y\n1,p\n2,?\n", "y").unwrap_err();
        assert!(matches!(err, Error::Data(ref m) if m.contains("line 3")));
    }
}
