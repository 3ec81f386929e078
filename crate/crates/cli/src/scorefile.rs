//! Score files: one comma-separated row of class scores per ensemble member,
//! optionally preceded by a `#` header naming the classes.
//!
//! ```text
//! # setosa, versicolor
//! 0.9, 0.1
//! 0.3, 0.7
//! 0.5, 0.5
//! ```

use std::path::Path;

use gmfuse::ensemble::ScoreMatrix;
use gmfuse::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFile {
    pub labels: Option<Vec<String>>,
    pub matrix: ScoreMatrix,
}

impl ScoreFile {
    /// Display name of class `j` (0-based).
    pub fn class_name(&self, j: usize) -> String {
        match &self.labels {
            Some(l) => l[j].clone(),
            None => format!("class {}", j + 1),
        }
    }
}

/// Parses score rows. Rows must sum to 1 within 1e-6 unless `normalize` is
/// set, in which case each row is divided by its sum first.
pub fn parse_scores(text: &str, normalize: bool) -> Result<ScoreFile> {
    let mut labels = None;
    let mut rows = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('#') {
            if labels.is_none() && rows.is_empty() {
                labels = Some(
                    header
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .collect::<Vec<_>>(),
                );
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    Error::MalformedScores(format!(
                        "line {}: `{}` is not a number",
                        i + 1,
                        f.trim()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let matrix = if normalize {
        ScoreMatrix::normalized(rows)?
    } else {
        ScoreMatrix::new(rows)?
    };
    if let Some(l) = &labels {
        if l.len() != matrix.n_classes() {
            return Err(Error::MalformedScores(format!(
                "header names {} classes, rows have {}",
                l.len(),
                matrix.n_classes()
            )));
        }
    }
    Ok(ScoreFile { labels, matrix })
}

pub fn load_scores(path: &Path, normalize: bool) -> Result<ScoreFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_scores(&text, normalize)
}
