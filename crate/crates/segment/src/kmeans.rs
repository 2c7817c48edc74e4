//! Lloyd's k-means from k-means++ seeds, best of several restarts.
//!
//! Points are processed in lexicographic order and clusters are numbered
//! by the order of their centroids, so the result depends only on the set
//! of points and the seed, not on the input row order.

use rand::Rng;
use serde::{Deserialize, Serialize};

use fvkit_core::rng;

use crate::error::{Error, Result};
use crate::points::{compare_rows, squared_distance, Points};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig { max_iterations: 300, restarts: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub k: usize,
    pub centroids: Points,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after every assignment step, one log per restart.
    pub inertia_logs: Vec<Vec<f64>>,
}

fn nearest(centroids: &Points, x: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.n {
        let d = squared_distance(centroids.row(c), x);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus<R: Rng>(x: &Points, k: usize, rng: &mut R) -> Points {
    let mut centroids = Points::zeros(k, x.d);
    let first = rng.random_range(0..x.n);
    centroids.row_mut(0).copy_from_slice(x.row(first));
    let mut dist: Vec<f64> = x.rows().map(|r| squared_distance(r, centroids.row(0))).collect();
    for c in 1..k {
        let total: f64 = dist.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = dist.iter().rposition(|&d| d > 0.0).unwrap_or(0);
        for (i, &d) in dist.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        centroids.row_mut(c).copy_from_slice(x.row(pick));
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(squared_distance(x.row(i), centroids.row(c)));
        }
    }
    centroids
}

struct Run {
    centroids: Points,
    assignments: Vec<usize>,
    inertia: f64,
    iterations: usize,
    converged: bool,
    log: Vec<f64>,
}

fn lloyd(x: &Points, mut centroids: Points, max_iterations: usize) -> Run {
    let k = centroids.n;
    let mut assignments = vec![usize::MAX; x.n];
    let mut log = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iterations {
        iterations += 1;
        let mut changed = false;
        let mut inertia = 0.0;
        for i in 0..x.n {
            let (c, d) = nearest(&centroids, x.row(i));
            inertia += d;
            if assignments[i] != c {
                assignments[i] = c;
                changed = true;
            }
        }
        log.push(inertia);
        if !changed {
            converged = true;
            break;
        }
        let mut sums = Points::zeros(k, x.d);
        let mut counts = vec![0usize; k];
        for i in 0..x.n {
            counts[assignments[i]] += 1;
            for (s, v) in sums.row_mut(assignments[i]).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            // an emptied cluster keeps its centroid
            if counts[c] > 0 {
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s / counts[c] as f64;
                }
            }
        }
    }
    let inertia = *log.last().unwrap_or(&0.0);
    Run { centroids, assignments, inertia, iterations, converged, log }
}

pub fn kmeans(x: &Points, k: usize, seed: u64, cfg: &KMeansConfig) -> Result<ClusterModel> {
    if k < 1 {
        return Err(Error::Config("k must be positive".into()));
    }
    if cfg.restarts == 0 || cfg.max_iterations == 0 {
        return Err(Error::Config("restarts and max_iterations must be positive".into()));
    }
    let distinct = x.distinct_rows();
    if k > distinct {
        return Err(Error::TooFewDistinct { k, distinct });
    }
    let order = x.sorted_order();
    let sorted = x.select(&order);
    let mut best: Option<Run> = None;
    let mut logs = Vec::with_capacity(cfg.restarts);
    for r in 0..cfg.restarts {
        let mut rng = rng::stream(seed, "kmeans.restart", r as u64);
        let run = lloyd(&sorted, plus_plus(&sorted, k, &mut rng), cfg.max_iterations);
        logs.push(run.log.clone());
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let run = best.expect("at least one restart");
    if !run.converged {
        log::warn!("k-means with k = {k} stopped at {} iterations", run.iterations);
    }
    // number clusters by centroid order
    let mut rank: Vec<usize> = (0..k).collect();
    rank.sort_by(|&a, &b| compare_rows(run.centroids.row(a), run.centroids.row(b)));
    let mut relabel = vec![0; k];
    for (new, &old) in rank.iter().enumerate() {
        relabel[old] = new;
    }
    let centroids = run.centroids.select(&rank);
    let mut assignments = vec![0; x.n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = relabel[run.assignments[pos]];
    }
    Ok(ClusterModel {
        k,
        centroids,
        assignments,
        inertia: run.inertia,
        iterations: run.iterations,
        converged: run.converged,
        inertia_logs: logs,
    })
}

/// Sum of squared distances to the assigned centroids.
pub fn inertia(x: &Points, centroids: &Points, assignments: &[usize]) -> f64 {
    (0..x.n).map(|i| squared_distance(x.row(i), centroids.row(assignments[i]))).sum()
}
