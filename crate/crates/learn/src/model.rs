//! Model kinds, hyperparameters, fitting and prediction.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fvkit_core::rng;

use crate::dataset::{Imputer, Matrix};
use crate::error::{Error, Result};
use crate::logistic::{fit_logistic, sigmoid, LogisticFit, Scaler};
use crate::tree::{bootstrap_weights, grow_boost_tree, grow_gini_tree, BinnedData, BoostTreeParams, GiniParams, Tree, MAX_BINS};

pub const MODEL_FORMAT: &str = "fvkit-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "LR")]
    Lr,
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "GBT")]
    Gbt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Lr, ModelKind::Rf, ModelKind::Gbt];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Lr => "LR",
            ModelKind::Rf => "RF",
            ModelKind::Gbt => "GBT",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "LR" => Ok(ModelKind::Lr),
            "RF" => Ok(ModelKind::Rf),
            "GBT" => Ok(ModelKind::Gbt),
            _ => Err(Error::Config(format!("unknown model kind '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Hyper {
    #[serde(rename = "LR")]
    Lr { lambda: f64 },
    #[serde(rename = "RF")]
    Rf { n_trees: usize, max_depth: Option<usize>, mtry: Option<usize> },
    #[serde(rename = "GBT")]
    Gbt { n_trees: usize, max_depth: usize, shrinkage: f64, lambda: f64, min_child_weight: f64 },
}

impl Hyper {
    pub fn kind(&self) -> ModelKind {
        match self {
            Hyper::Lr { .. } => ModelKind::Lr,
            Hyper::Rf { .. } => ModelKind::Rf,
            Hyper::Gbt { .. } => ModelKind::Gbt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Params {
    #[serde(rename = "LR")]
    Lr { scaler: Scaler, fit: LogisticFit },
    #[serde(rename = "RF")]
    Rf { trees: Vec<Tree> },
    #[serde(rename = "GBT")]
    Gbt {
        base_score: f64,
        trees: Vec<Tree>,
        /// Mean training log loss after each stage, starting from the base
        /// score.
        loss_path: Vec<f64>,
    },
}

impl Params {
    /// Probability of the positive class for one imputed row.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match self {
            Params::Lr { scaler, fit } => {
                let mut z = vec![0.0; row.len()];
                scaler.apply_row(row, &mut z);
                fit.predict_row(&z)
            }
            Params::Rf { trees } => trees.iter().map(|t| t.predict(row)).sum::<f64>() / trees.len() as f64,
            Params::Gbt { base_score, trees, .. } => {
                sigmoid(base_score + trees.iter().map(|t| t.predict(row)).sum::<f64>())
            }
        }
    }

    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.n_rows).map(|i| self.predict_row(x.row(i))).collect()
    }

    pub fn trees(&self) -> Option<&[Tree]> {
        match self {
            Params::Lr { .. } => None,
            Params::Rf { trees } | Params::Gbt { trees, .. } => Some(trees),
        }
    }
}

fn log_loss(score: f64, y: bool) -> f64 {
    // log(1 + e^-s) for positives, log(1 + e^s) for negatives
    let z = if y { -score } else { score };
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Fit one model on an imputed matrix.
pub fn fit(hyper: &Hyper, x: &Matrix, y: &[bool], seed: u64) -> Params {
    match *hyper {
        Hyper::Lr { lambda } => {
            let scaler = Scaler::fit(x);
            let fit = fit_logistic(&scaler.apply(x), y, lambda);
            Params::Lr { scaler, fit }
        }
        Hyper::Rf { n_trees, max_depth, mtry } => {
            let data = BinnedData::new(x, MAX_BINS);
            let p = x.n_cols;
            let mtry = mtry.unwrap_or_else(|| ((p as f64).sqrt().floor() as usize).max(1));
            let trees = (0..n_trees)
                .into_par_iter()
                .map(|t| {
                    let mut r = rng::stream(seed, "forest.tree", t as u64);
                    let weights = bootstrap_weights(x.n_rows, &mut r);
                    grow_gini_tree(&data, y, &weights, GiniParams { max_depth, mtry }, &mut r)
                })
                .collect();
            Params::Rf { trees }
        }
        Hyper::Gbt { n_trees, max_depth, shrinkage, lambda, min_child_weight } => {
            fit_boosted(x, y, n_trees, BoostTreeParams { max_depth, lambda, min_child_weight }, shrinkage)
        }
    }
}

fn fit_boosted(x: &Matrix, y: &[bool], n_trees: usize, params: BoostTreeParams, shrinkage: f64) -> Params {
    let data = BinnedData::new(x, MAX_BINS);
    let n = x.n_rows;
    let pos = y.iter().filter(|&&v| v).count() as f64;
    let rate = (pos / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (rate / (1.0 - rate)).ln();
    let mut score = vec![base_score; n];
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];
    let mut trees = Vec::with_capacity(n_trees);
    let total_loss = |score: &[f64]| score.iter().zip(y).map(|(&s, &l)| log_loss(s, l)).sum::<f64>() / n as f64;
    let mut loss_path = vec![total_loss(&score)];
    for _ in 0..n_trees {
        for i in 0..n {
            let p = sigmoid(score[i]);
            grad[i] = p - f64::from(u8::from(y[i]));
            hess[i] = p * (1.0 - p);
        }
        let (mut tree, leaves) = grow_boost_tree(&data, &grad, &hess, params);
        // shrink each leaf's Newton step, halving it until the leaf's loss
        // does not rise, so the training loss never increases
        for leaf in &leaves {
            let crate::tree::Node::Leaf { value } = tree.nodes[leaf.node] else { unreachable!() };
            let before: f64 = leaf.rows.iter().map(|&r| log_loss(score[r as usize], y[r as usize])).sum();
            let mut step = shrinkage * value;
            let mut accepted = 0.0;
            for _ in 0..40 {
                let after: f64 =
                    leaf.rows.iter().map(|&r| log_loss(score[r as usize] + step, y[r as usize])).sum();
                if after <= before {
                    accepted = step;
                    break;
                }
                step *= 0.5;
            }
            tree.nodes[leaf.node] = crate::tree::Node::Leaf { value: accepted };
            for &r in &leaf.rows {
                score[r as usize] += accepted;
            }
        }
        trees.push(tree);
        loss_path.push(total_loss(&score));
    }
    Params::Gbt { base_score, trees, loss_path }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub feature: String,
    pub mean: f64,
    pub sd: f64,
}

/// Per tree, the summed split gain of each feature; then the mean and SD
/// across trees, scaled so the means sum to one. For forests the gain is
/// the weighted Gini decrease, for boosting the second-order loss
/// reduction.
pub fn importance(params: &Params, names: &[String]) -> Result<Vec<FeatureImportance>> {
    let trees = params.trees().ok_or(Error::ImportanceRequiresTrees)?;
    let p = names.len();
    let per_tree: Vec<Vec<f64>> = trees.iter().map(|t| t.gain_by_feature(p)).collect();
    let n = per_tree.len().max(1) as f64;
    let mut mean = vec![0.0; p];
    for g in &per_tree {
        for (m, v) in mean.iter_mut().zip(g) {
            *m += v / n;
        }
    }
    let mut sd = vec![0.0; p];
    for g in &per_tree {
        for ((s, v), m) in sd.iter_mut().zip(g).zip(&mean) {
            *s += (v - m) * (v - m) / n;
        }
    }
    let total: f64 = mean.iter().sum();
    let scale = if total > 0.0 { 1.0 / total } else { 0.0 };
    Ok(names
        .iter()
        .enumerate()
        .map(|(j, name)| FeatureImportance { feature: name.clone(), mean: mean[j] * scale, sd: sd[j].sqrt() * scale })
        .collect())
}

/// A fitted model with everything needed to score raw feature rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub hyper: Hyper,
    pub imputer: Imputer,
    pub params: Params,
    pub seed: u64,
}

impl TrainedModel {
    pub fn new(hyper: Hyper, imputer: Imputer, params: Params, seed: u64) -> TrainedModel {
        TrainedModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_FORMAT_VERSION,
            kind: hyper.kind(),
            hyper,
            imputer,
            params,
            seed,
        }
    }

    pub fn predict_raw(&self, rows: &[&[Option<f64>]]) -> Vec<f64> {
        self.params.predict(&self.imputer.transform(rows))
    }

    pub fn importance(&self) -> Result<Vec<FeatureImportance>> {
        importance(&self.params, &self.imputer.output_names)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        let model: TrainedModel = serde_json::from_str(text)?;
        if model.format != MODEL_FORMAT {
            return Err(Error::Config(format!("not a model file: format '{}'", model.format)));
        }
        if model.version != MODEL_FORMAT_VERSION {
            return Err(Error::Version(model.version));
        }
        Ok(model)
    }
}
