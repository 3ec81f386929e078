use crate::data::{Cell, Dataset, Feature, FeatureKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Column {
    Numeric { mean: f64, std: f64 },
    Categorical { levels: usize, mode: u32 },
}

/// Turns schema rows into dense feature vectors: numeric columns are
/// standardized with training statistics, categorical columns are one-hot
/// encoded, and missing values take the training mean or mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessor {
    columns: Vec<Column>,
    width: usize,
}

impl Preprocessor {
    pub fn fit(train: &Dataset) -> Self {
        let columns: Vec<Column> = train
            .features()
            .iter()
            .enumerate()
            .map(|(j, feature)| fit_column(feature, train.rows().iter().map(|r| r[j])))
            .collect();
        let width = columns
            .iter()
            .map(|c| match c {
                Column::Numeric { .. } => 1,
                Column::Categorical { levels, .. } => *levels,
            })
            .sum();
        Self { columns, width }
    }

    pub fn input_len(&self) -> usize {
        self.columns.len()
    }

    /// Length of the encoded vectors.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn transform(&self, row: &[Cell]) -> Result<Vec<f64>> {
        if row.len() != self.columns.len() {
            return Err(Error::Feature(format!(
                "instance has {} features, model was trained on {}",
                row.len(),
                self.columns.len()
            )));
        }
        let mut out = Vec::with_capacity(self.width);
        for (j, (column, cell)) in self.columns.iter().zip(row).enumerate() {
            match (column, *cell) {
                (Column::Numeric { mean, std }, Cell::Num(v)) => out.push((v - mean) / std),
                (Column::Numeric { .. }, Cell::Missing) => out.push(0.0),
                (Column::Categorical { levels, mode }, cell) => {
                    let level = match cell {
                        Cell::Cat(l) => l,
                        Cell::Missing => *mode,
                        Cell::Num(_) => {
                            return Err(Error::Feature(format!("feature {j}: expected a category")))
                        }
                    };
                    let start = out.len();
                    out.resize(start + levels, 0.0);
                    if (level as usize) < *levels {
                        out[start + level as usize] = 1.0;
                    }
                }
                (Column::Numeric { .. }, Cell::Cat(_)) => {
                    return Err(Error::Feature(format!("feature {j}: expected a number")))
                }
            }
        }
        Ok(out)
    }

    pub fn transform_all(&self, rows: &[Vec<Cell>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }
}

fn fit_column(feature: &Feature, cells: impl Iterator<Item = Cell>) -> Column {
    match &feature.kind {
        FeatureKind::Numeric => {
            let values: Vec<f64> = cells
                .filter_map(|c| match c {
                    Cell::Num(v) => Some(v),
                    _ => None,
                })
                .collect();
            if values.is_empty() {
                return Column::Numeric {
                    mean: 0.0,
                    std: 1.0,
                };
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let std = if var > 0.0 { var.sqrt() } else { 1.0 };
            Column::Numeric { mean, std }
        }
        FeatureKind::Categorical { levels } => {
            let mut counts = vec![0usize; levels.len()];
            for c in cells {
                if let Cell::Cat(l) = c {
                    counts[l as usize] += 1;
                }
            }
            // First level wins ties.
            let mode = counts
                .iter()
                .enumerate()
                .fold(0, |best, (i, &c)| if c > counts[best] { i } else { best });
            Column::Categorical {
                levels: levels.len(),
                mode: mode as u32,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::parse_dataset;

    #[test]
    fn standardizes_encodes_and_imputes() {
        let d = parse_dataset("t", "a,b,y\n1,x,p\n3,z,q\n?,z,p\n".as_bytes(), b',', "y").unwrap();
        let p = Preprocessor::fit(&d);
        assert_eq!(p.width(), 3);
        assert_eq!(p.transform(&d.rows()[0]).unwrap(), vec![-1.0, 1.0, 0.0]);
        assert_eq!(p.transform(&d.rows()[1]).unwrap(), vec![1.0, 0.0, 1.0]);
        assert_eq!(
            p.transform(&[Cell::Missing, Cell::Missing]).unwrap(),
            vec![0.0, 0.0, 1.0]
        );
        assert!(matches!(
            p.transform(&[Cell::Num(1.0)]),
            Err(Error::Feature(_))
        ));
    }
}
