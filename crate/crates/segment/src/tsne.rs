//! Exact t-SNE for visual export.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fvkit_core::rng;

use crate::error::{Error, Result};
use crate::points::{squared_distance, Points};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TsneConfig {
    /// Defaults to `min(30, (n - 1) / 3 - 1)`.
    pub perplexity: Option<f64>,
    pub iterations: usize,
    /// Defaults to `max(n / early_exaggeration / 4, 50)`.
    pub learning_rate: Option<f64>,
    pub early_exaggeration: f64,
    pub exaggeration_iterations: usize,
}

impl Default for TsneConfig {
    fn default() -> Self {
        TsneConfig {
            perplexity: None,
            iterations: 1000,
            learning_rate: None,
            early_exaggeration: 12.0,
            exaggeration_iterations: 250,
        }
    }
}

pub fn perplexity_bound(n: usize) -> f64 {
    (n as f64 - 1.0) / 3.0
}

pub fn default_perplexity(n: usize) -> f64 {
    (perplexity_bound(n) - 1.0).min(30.0)
}

/// Conditional affinities of one point, with the Gaussian bandwidth found
/// by bisection so the entropy matches `ln(perplexity)`.
fn conditional_row(dist: &[f64], i: usize, perplexity: f64) -> Vec<f64> {
    let target = perplexity.ln();
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    let mut beta = 1.0;
    let mut p = vec![0.0; dist.len()];
    for _ in 0..200 {
        let mut sum = 0.0;
        for (j, &d) in dist.iter().enumerate() {
            p[j] = if j == i { 0.0 } else { (-beta * d).exp() };
            sum += p[j];
        }
        if sum == 0.0 {
            // bandwidth too narrow for every neighbour
            hi = beta;
            beta = (lo + hi) / 2.0;
            continue;
        }
        let mut weighted = 0.0;
        for (j, &d) in dist.iter().enumerate() {
            weighted += p[j] * d;
        }
        let entropy = sum.ln() + beta * weighted / sum;
        for v in &mut p {
            *v /= sum;
        }
        let diff = entropy - target;
        if diff.abs() < 1e-5 {
            break;
        }
        if diff > 0.0 {
            lo = beta;
            beta = if hi.is_finite() { (lo + hi) / 2.0 } else { beta * 2.0 };
        } else {
            hi = beta;
            beta = (lo + hi) / 2.0;
        }
    }
    p
}

/// Two coordinates per point.
pub fn tsne_embed(x: &Points, seed: u64, cfg: &TsneConfig) -> Result<Points> {
    let n = x.n;
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let bound = perplexity_bound(n);
    let perplexity = cfg.perplexity.unwrap_or_else(|| default_perplexity(n));
    if !(perplexity < bound) || perplexity <= 0.0 {
        return Err(Error::PerplexityTooLarge { perplexity, bound });
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let dist: Vec<f64> = (0..n).map(|j| squared_distance(x.row(i), x.row(j))).collect();
            conditional_row(&dist, i, perplexity)
        })
        .collect();
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((rows[i][j] + rows[j][i]) / (2.0 * n as f64)).max(1e-12);
        }
    }
    let learning_rate = cfg.learning_rate.unwrap_or_else(|| (n as f64 / cfg.early_exaggeration / 4.0).max(50.0));
    let mut rng = rng::stream(seed, "tsne.init", 0);
    let mut y: Vec<f64> = (0..2 * n).map(|_| 1e-4 * rng.sample::<f64, _>(StandardNormal)).collect();
    let mut velocity = vec![0.0; 2 * n];
    let mut gains = vec![1.0; 2 * n];
    let mut num = vec![0.0; n * n];
    for iter in 0..cfg.iterations {
        let exaggeration = if iter < cfg.exaggeration_iterations { cfg.early_exaggeration } else { 1.0 };
        let momentum = if iter < cfg.exaggeration_iterations { 0.5 } else { 0.8 };
        num.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i == j {
                    0.0
                } else {
                    let dx = y[2 * i] - y[2 * j];
                    let dy = y[2 * i + 1] - y[2 * j + 1];
                    1.0 / (1.0 + dx * dx + dy * dy)
                };
            }
        });
        let z: f64 = num.par_chunks(n).map(|r| r.iter().sum::<f64>()).sum();
        let grad: Vec<[f64; 2]> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut g = [0.0, 0.0];
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    let w = num[i * n + j];
                    let m = (exaggeration * p[i * n + j] - w / z) * w;
                    g[0] += 4.0 * m * (y[2 * i] - y[2 * j]);
                    g[1] += 4.0 * m * (y[2 * i + 1] - y[2 * j + 1]);
                }
                g
            })
            .collect();
        for i in 0..n {
            for c in 0..2 {
                let k = 2 * i + c;
                let g = grad[i][c];
                gains[k] = if (g > 0.0) != (velocity[k] > 0.0) { gains[k] + 0.2 } else { (gains[k] * 0.8f64).max(0.01) };
                velocity[k] = momentum * velocity[k] - learning_rate * gains[k] * g;
                y[k] += velocity[k];
            }
        }
        let (mx, my) = (0..n).fold((0.0, 0.0), |(a, b), i| (a + y[2 * i], b + y[2 * i + 1]));
        for i in 0..n {
            y[2 * i] -= mx / n as f64;
            y[2 * i + 1] -= my / n as f64;
        }
    }
    Ok(Points { n, d: 2, data: y })
}
