//! L2-regularised logistic regression fitted by damped Newton steps.
//!
//! The objective is the mean log loss plus `lambda / 2 * |w|^2`; the
//! intercept is not penalised. Parameters are laid out as the feature
//! weights followed by the intercept.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;

pub const GRADIENT_TOLERANCE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 100;

/// Numerically stable log(1 + e^z).
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn linear(x: &Matrix, params: &[f64], i: usize) -> f64 {
    let p = x.n_cols;
    x.row(i).iter().zip(&params[..p]).map(|(a, b)| a * b).sum::<f64>() + params[p]
}

pub fn objective(x: &Matrix, y: &[bool], params: &[f64], lambda: f64) -> f64 {
    let n = x.n_rows as f64;
    let loss: f64 = (0..x.n_rows)
        .map(|i| {
            let z = linear(x, params, i);
            softplus(z) - if y[i] { z } else { 0.0 }
        })
        .sum();
    let penalty: f64 = params[..x.n_cols].iter().map(|w| w * w).sum();
    loss / n + 0.5 * lambda * penalty
}

pub fn gradient(x: &Matrix, y: &[bool], params: &[f64], lambda: f64) -> Vec<f64> {
    let p = x.n_cols;
    let n = x.n_rows as f64;
    let mut g = vec![0.0; p + 1];
    for i in 0..x.n_rows {
        let r = sigmoid(linear(x, params, i)) - f64::from(u8::from(y[i]));
        for (gj, xj) in g.iter_mut().zip(x.row(i)) {
            *gj += r * xj;
        }
        g[p] += r;
    }
    for j in 0..=p {
        g[j] /= n;
        if j < p {
            g[j] += lambda * params[j];
        }
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

impl LogisticFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let z: f64 = row.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() + self.intercept;
        sigmoid(z)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Newton iterations with backtracking until the gradient norm falls below
/// the tolerance. On non-convergence the last iterate is returned with
/// `converged = false`.
pub fn fit_logistic(x: &Matrix, y: &[bool], lambda: f64) -> LogisticFit {
    let p = x.n_cols;
    let n = x.n_rows;
    let design = DMatrix::from_fn(n, p + 1, |i, j| if j < p { x.get(i, j) } else { 1.0 });
    let mut params = vec![0.0; p + 1];
    let mut value = objective(x, y, &params, lambda);
    let mut g = gradient(x, y, &params, lambda);
    let mut iterations = 0;
    while norm(&g) >= GRADIENT_TOLERANCE && iterations < MAX_ITERATIONS {
        iterations += 1;
        let theta = DVector::from_column_slice(&params);
        let z = &design * &theta;
        // rows scaled by sqrt(p(1-p)/n) so that H = Xs' Xs + lambda I
        let mut scaled = design.clone();
        for i in 0..n {
            let s = sigmoid(z[i]);
            let w = (s * (1.0 - s) / n as f64).sqrt();
            scaled.row_mut(i).scale_mut(w);
        }
        let mut hessian = scaled.tr_mul(&scaled);
        for j in 0..p {
            hessian[(j, j)] += lambda;
        }
        let grad = DVector::from_column_slice(&g);
        let step = match hessian.clone().cholesky() {
            Some(c) => c.solve(&grad),
            None => {
                for j in 0..=p {
                    hessian[(j, j)] += 1e-8;
                }
                match hessian.cholesky() {
                    Some(c) => c.solve(&grad),
                    None => grad.clone(),
                }
            }
        };
        let slope: f64 = step.dot(&grad);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = params.iter().zip(step.iter()).map(|(a, d)| a - t * d).collect();
            let v = objective(x, y, &candidate, lambda);
            if v <= value - 1e-4 * t * slope {
                params = candidate;
                value = v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        g = gradient(x, y, &params, lambda);
        if !accepted {
            break;
        }
    }
    let gradient_norm = norm(&g);
    let converged = gradient_norm < GRADIENT_TOLERANCE;
    if !converged {
        log::warn!("logistic regression stopped after {iterations} iterations, gradient norm {gradient_norm:.3e}");
    }
    LogisticFit { intercept: params[p], weights: params[..p].to_vec(), iterations, gradient_norm, converged }
}

/// Per-column mean and SD used to standardise inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

impl Scaler {
    pub fn fit(x: &Matrix) -> Scaler {
        let n = x.n_rows as f64;
        let mut mean = vec![0.0; x.n_cols];
        for i in 0..x.n_rows {
            for (m, v) in mean.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; x.n_cols];
        for i in 0..x.n_rows {
            for ((s, v), m) in var.iter_mut().zip(x.row(i)).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let sd = var.iter().map(|v| if *v > 0.0 { (v / n).sqrt() } else { 1.0 }).collect();
        Scaler { mean, sd }
    }

    pub fn apply_row(&self, row: &[f64], out: &mut [f64]) {
        for (j, (o, v)) in out.iter_mut().zip(row).enumerate() {
            *o = (v - self.mean[j]) / self.sd[j];
        }
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(x.n_rows, x.n_cols);
        for i in 0..x.n_rows {
            let (a, b) = (i * x.n_cols, (i + 1) * x.n_cols);
            self.apply_row(x.row(i), &mut out.data[a..b]);
        }
        out
    }
}
