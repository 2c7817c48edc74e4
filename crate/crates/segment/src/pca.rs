//! Principal components of z-scored columns.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::Points;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Components {
    /// Smallest count whose cumulative explained variance reaches the
    /// target.
    VarianceTarget(f64),
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Input column indices that survived the zero-variance filter.
    pub kept: Vec<usize>,
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
    /// One unit-length loading vector per component, over kept columns.
    pub loadings: Vec<Vec<f64>>,
    /// Explained-variance ratio of every component, not only the retained.
    pub explained_ratio: Vec<f64>,
    pub n_components: usize,
}

/// Relative tolerance used when comparing cumulative variance to a target.
const VARIANCE_TOLERANCE: f64 = 1e-9;

pub fn fit_pca(x: &Points, components: Components) -> Result<PcaModel> {
    if x.n < 2 {
        return Err(Error::TooFewRows(x.n));
    }
    let n = x.n as f64;
    let mut kept = Vec::new();
    let mut mean = Vec::new();
    let mut sd = Vec::new();
    for j in 0..x.d {
        let m = x.rows().map(|r| r[j]).sum::<f64>() / n;
        let var = x.rows().map(|r| (r[j] - m).powi(2)).sum::<f64>() / (n - 1.0);
        if var > 1e-24 * m.abs().max(1.0).powi(2) {
            kept.push(j);
            mean.push(m);
            sd.push(var.sqrt());
        } else {
            log::debug!("dropping zero-variance column {j}");
        }
    }
    if kept.is_empty() {
        return Err(Error::NoColumns);
    }
    let p = kept.len();
    let z = DMatrix::from_fn(x.n, p, |i, c| (x.row(i)[kept[c]] - mean[c]) / sd[c]);
    let cov = (z.transpose() * &z) / (n - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    let explained_ratio: Vec<f64> = values.iter().map(|v| v / total).collect();
    let loadings: Vec<Vec<f64>> = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            // sign convention: the largest-magnitude entry is positive
            let big = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            if big < 0.0 {
                v.iter_mut().for_each(|e| *e = -*e);
            }
            v
        })
        .collect();
    let n_components = match components {
        Components::Count(c) => {
            if c == 0 || c > p {
                return Err(Error::Config(format!("n_components {c} outside 1..={p}")));
            }
            c
        }
        Components::VarianceTarget(t) => {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Config(format!("variance target {t} outside (0, 1]")));
            }
            let mut cum = 0.0;
            let mut c = p;
            for (i, r) in explained_ratio.iter().enumerate() {
                cum += r;
                if cum >= t - VARIANCE_TOLERANCE {
                    c = i + 1;
                    break;
                }
            }
            c
        }
    };
    Ok(PcaModel { kept, mean, sd, loadings, explained_ratio, n_components })
}

impl PcaModel {
    pub fn standardize_row(&self, row: &[f64]) -> Vec<f64> {
        self.kept.iter().enumerate().map(|(c, &j)| (row[j] - self.mean[c]) / self.sd[c]).collect()
    }

    /// Scores on the retained components.
    pub fn transform(&self, x: &Points) -> Points {
        self.project(x, self.n_components)
    }

    pub fn project(&self, x: &Points, n_components: usize) -> Points {
        let mut out = Points::zeros(x.n, n_components);
        for i in 0..x.n {
            let z = self.standardize_row(x.row(i));
            for (c, v) in self.loadings[..n_components].iter().enumerate() {
                out.row_mut(i)[c] = v.iter().zip(&z).map(|(a, b)| a * b).sum();
            }
        }
        out
    }

    /// Map component scores back to z-scored kept columns.
    pub fn back_project(&self, scores: &Points) -> Points {
        let p = self.kept.len();
        let mut out = Points::zeros(scores.n, p);
        for i in 0..scores.n {
            for (c, v) in self.loadings[..scores.d].iter().enumerate() {
                let s = scores.row(i)[c];
                for (o, l) in out.row_mut(i).iter_mut().zip(v) {
                    *o += s * l;
                }
            }
        }
        out
    }

    pub fn cumulative_ratio(&self) -> f64 {
        self.explained_ratio[..self.n_components].iter().sum()
    }
}
