//! Feature matrices, targets and training-time imputation.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named feature rows with a time key per row. Targets are kept
/// separately so one dataset serves many targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub ids: Vec<String>,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
    pub time_keys: Vec<i32>,
}

impl Dataset {
    pub fn new(
        ids: Vec<String>,
        feature_names: Vec<String>,
        rows: Vec<Vec<Option<f64>>>,
        time_keys: Vec<i32>,
    ) -> Result<Dataset> {
        if ids.len() != rows.len() || time_keys.len() != rows.len() {
            return Err(Error::Dataset("ids, rows and time keys differ in length".into()));
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Dataset(format!("duplicate column '{name}'")));
            }
        }
        if let Some(i) = rows.iter().position(|r| r.len() != feature_names.len()) {
            return Err(Error::Dataset(format!("row {i} has {} values", rows[i].len())));
        }
        Ok(Dataset { ids, feature_names, rows, time_keys })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Copy without the named columns; unknown names are ignored.
    pub fn without_features<S: AsRef<str>>(&self, drop: &[S]) -> Dataset {
        let drop: HashSet<&str> = drop.iter().map(AsRef::as_ref).collect();
        let keep: Vec<usize> =
            (0..self.n_features()).filter(|&j| !drop.contains(self.feature_names[j].as_str())).collect();
        Dataset {
            ids: self.ids.clone(),
            feature_names: keep.iter().map(|&j| self.feature_names[j].clone()).collect(),
            rows: self.rows.iter().map(|r| keep.iter().map(|&j| r[j]).collect()).collect(),
            time_keys: self.time_keys.clone(),
        }
    }
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Matrix {
        Matrix { n_rows, n_cols, data: vec![0.0; n_rows * n_cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Matrix {
        let n_cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix { n_rows: rows.len(), n_cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self.get(i, j)).collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Matrix { n_rows: rows.len(), n_cols: self.n_cols, data }
    }
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { (values[n / 2 - 1] + values[n / 2]) / 2.0 })
}

/// Median fill plus a missing-indicator column for every feature that had
/// missing values in training. Columns constant on the training rows are
/// dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Imputer {
    pub input_names: Vec<String>,
    pub medians: Vec<f64>,
    /// Input columns that get an indicator, in input order.
    pub indicators: Vec<usize>,
    /// Indices into the expanded (inputs then indicators) columns.
    pub keep: Vec<usize>,
    pub output_names: Vec<String>,
}

impl Imputer {
    pub fn fit(names: &[String], rows: &[&[Option<f64>]]) -> Imputer {
        let p = names.len();
        let mut medians = Vec::with_capacity(p);
        let mut indicators = Vec::new();
        for j in 0..p {
            let mut present: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            if present.len() < rows.len() {
                indicators.push(j);
            }
            medians.push(median(&mut present).unwrap_or(0.0));
        }
        let mut imputer = Imputer {
            input_names: names.to_vec(),
            medians,
            indicators,
            keep: Vec::new(),
            output_names: Vec::new(),
        };
        let expanded_names: Vec<String> = names
            .iter()
            .cloned()
            .chain(imputer.indicators.iter().map(|&j| format!("{}_missing", names[j])))
            .collect();
        imputer.keep = (0..expanded_names.len()).collect();
        let full = imputer.transform(rows);
        let keep: Vec<usize> = (0..full.n_cols)
            .filter(|&j| {
                full.n_rows > 0 && {
                    let first = full.get(0, j);
                    (1..full.n_rows).any(|i| full.get(i, j) != first)
                }
            })
            .collect();
        for j in 0..full.n_cols {
            if !keep.contains(&j) {
                log::debug!("dropping zero-variance column '{}'", expanded_names[j]);
            }
        }
        imputer.output_names = keep.iter().map(|&j| expanded_names[j].clone()).collect();
        imputer.keep = keep;
        imputer
    }

    pub fn n_outputs(&self) -> usize {
        self.keep.len()
    }

    pub fn transform_row(&self, row: &[Option<f64>], out: &mut Vec<f64>) {
        let p = self.input_names.len();
        for &k in &self.keep {
            let v = if k < p {
                row[k].unwrap_or(self.medians[k])
            } else {
                f64::from(u8::from(row[self.indicators[k - p]].is_none()))
            };
            out.push(v);
        }
    }

    pub fn transform(&self, rows: &[&[Option<f64>]]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.keep.len());
        for r in rows {
            self.transform_row(r, &mut data);
        }
        Matrix { n_rows: rows.len(), n_cols: self.keep.len(), data }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_fill_and_indicator() {
        let names = vec!["a".to_string(), "b".to_string()];
        let rows = [vec![Some(1.0), Some(5.0)], vec![None, Some(6.0)], vec![Some(3.0), Some(7.0)], vec![Some(10.0), Some(8.0)]];
        let refs: Vec<&[Option<f64>]> = rows.iter().map(Vec::as_slice).collect();
        let imp = Imputer::fit(&names, &refs);
        assert_eq!(imp.output_names, ["a", "b", "a_missing"]);
        let m = imp.transform(&refs);
        assert_eq!(m.row(1), &[3.0, 6.0, 1.0]);
        assert_eq!(m.row(0), &[1.0, 5.0, 0.0]);
    }

    #[test]
    fn constant_columns_dropped() {
        let names = vec!["a".to_string(), "c".to_string()];
        let rows = [vec![Some(1.0), Some(2.0)], vec![Some(2.0), Some(2.0)]];
        let refs: Vec<&[Option<f64>]> = rows.iter().map(Vec::as_slice).collect();
        let imp = Imputer::fit(&names, &refs);
        assert_eq!(imp.output_names, ["a"]);
    }

    #[test]
    fn duplicate_names_rejected() {
        let r = Dataset::new(vec!["x".into()], vec!["a".into(), "a".into()], vec![vec![None, None]], vec![0]);
        assert!(r.is_err());
    }
}
