//! Per-cluster means of features, label rates and protected-attribute
//! rates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named column to profile; `None` values are skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub name: String,
    /// Mean per cluster; `None` when no member has a value.
    pub means: Vec<Option<f64>>,
    pub min_cluster: Option<usize>,
    pub max_cluster: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub k: usize,
    pub sizes: Vec<usize>,
    pub shares: Vec<f64>,
    pub rows: Vec<ProfileRow>,
}

pub fn profile_clusters(assignments: &[usize], k: usize, columns: &[Column]) -> Result<ClusterProfile> {
    let mut sizes = vec![0usize; k];
    for &a in assignments {
        if a >= k {
            return Err(Error::Config(format!("assignment {a} outside 0..{k}")));
        }
        sizes[a] += 1;
    }
    if let Some(c) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(c));
    }
    let n = assignments.len() as f64;
    let shares = sizes.iter().map(|&s| s as f64 / n).collect();
    let mut rows = Vec::with_capacity(columns.len());
    for col in columns {
        if col.values.len() != assignments.len() {
            return Err(Error::Config(format!("column {} has {} values", col.name, col.values.len())));
        }
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for (&a, v) in assignments.iter().zip(&col.values) {
            if let Some(v) = v {
                sum[a] += v;
                count[a] += 1;
            }
        }
        let means: Vec<Option<f64>> = (0..k).map(|c| (count[c] > 0).then(|| sum[c] / count[c] as f64)).collect();
        let present = || means.iter().enumerate().filter_map(|(c, m)| m.map(|m| (c, m)));
        // first cluster wins ties
        let min_cluster = present().fold(None, |b: Option<(usize, f64)>, (c, m)| match b {
            Some((_, bm)) if bm <= m => b,
            _ => Some((c, m)),
        });
        let max_cluster = present().fold(None, |b: Option<(usize, f64)>, (c, m)| match b {
            Some((_, bm)) if bm >= m => b,
            _ => Some((c, m)),
        });
        rows.push(ProfileRow {
            name: col.name.clone(),
            means,
            min_cluster: min_cluster.map(|(c, _)| c),
            max_cluster: max_cluster.map(|(c, _)| c),
        });
    }
    Ok(ClusterProfile { k, sizes, shares, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarRow {
    pub name: String,
    pub a: f64,
    pub b: f64,
}

/// Radar-chart values for two clusters: each row's means rescaled to
/// [0, 1] over all clusters. Rows with a missing mean, or the same mean
/// in every cluster, are left out.
pub fn radar(profile: &ClusterProfile, a: usize, b: usize) -> Result<Vec<RadarRow>> {
    if a >= profile.k || b >= profile.k {
        return Err(Error::Config(format!("clusters {a} and {b} must be below {}", profile.k)));
    }
    let mut out = Vec::new();
    for row in &profile.rows {
        let Some(means) = row.means.iter().copied().collect::<Option<Vec<f64>>>() else { continue };
        let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            out.push(RadarRow { name: row.name.clone(), a: (means[a] - lo) / (hi - lo), b: (means[b] - lo) / (hi - lo) });
        }
    }
    Ok(out)
}
