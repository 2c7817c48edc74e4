//! Silhouette scores and k selection.

use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans::{kmeans, ClusterModel, KMeansConfig};
use crate::points::{squared_distance, Points};

/// Mean silhouette below this marks the data as weakly clustered.
pub const WEAK_STRUCTURE: f64 = 0.3;

/// Silhouette of every point. Points in singleton clusters score 0.
pub fn silhouette_samples(x: &Points, assignments: &[usize], k: usize) -> Vec<f64> {
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        sizes[a] += 1;
    }
    (0..x.n)
        .into_par_iter()
        .map(|i| {
            let own = assignments[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..x.n {
                if j != i {
                    sums[assignments[j]] += squared_distance(x.row(i), x.row(j)).sqrt();
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own && sizes[c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            if !b.is_finite() {
                return 0.0;
            }
            let m = a.max(b);
            if m == 0.0 {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect()
}

pub fn silhouette_mean(x: &Points, assignments: &[usize], k: usize) -> f64 {
    let s = silhouette_samples(x, assignments, k);
    s.iter().sum::<f64>() / s.len().max(1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KDiagnostic {
    pub k: usize,
    pub inertia: f64,
    pub silhouette: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub diagnostics: Vec<KDiagnostic>,
    /// Silhouette maximiser; the smallest k wins ties.
    pub recommended: usize,
    pub weak_structure: bool,
    pub models: Vec<ClusterModel>,
}

impl Selection {
    pub fn model(&self, k: usize) -> Option<&ClusterModel> {
        self.models.iter().find(|m| m.k == k)
    }
}

pub fn select_k(x: &Points, ks: RangeInclusive<usize>, seed: u64, cfg: &KMeansConfig) -> Result<Selection> {
    let (lo, hi) = (*ks.start(), *ks.end());
    if lo < 2 || hi > 12 || lo > hi {
        return Err(Error::KRange(lo, hi));
    }
    let mut diagnostics = Vec::new();
    let mut models = Vec::new();
    for k in ks {
        let model = kmeans(x, k, seed, cfg)?;
        let silhouette = silhouette_mean(x, &model.assignments, k);
        diagnostics.push(KDiagnostic { k, inertia: model.inertia, silhouette });
        models.push(model);
    }
    let best = diagnostics
        .iter()
        .fold(None::<&KDiagnostic>, |b, d| if b.is_none_or(|b| d.silhouette > b.silhouette) { Some(d) } else { b })
        .expect("non-empty range");
    let weak_structure = diagnostics.iter().all(|d| d.silhouette < WEAK_STRUCTURE);
    if weak_structure {
        log::warn!("weak structure: every silhouette is below {WEAK_STRUCTURE}");
    }
    Ok(Selection { recommended: best.k, weak_structure, diagnostics, models })
}
