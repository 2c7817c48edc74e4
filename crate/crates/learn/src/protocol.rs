//! The training protocol: out-of-time split, balancing, imputation,
//! grid search by stratified k-fold AUROC, refit and test evaluation.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use fvkit_core::rng;

use crate::dataset::{Dataset, Imputer, Matrix};
use crate::error::{Error, Result};
use crate::metrics::{auroc, evaluate_scores, Metrics};
use crate::model::{fit, FeatureImportance, Hyper, ModelKind, Params, TrainedModel};
use crate::split::{balance_training, split_out_of_time, SplitPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lr_lambda: Vec<f64>,
    pub rf_trees: usize,
    /// Zero grows trees until leaves are pure.
    pub rf_max_depth: Vec<usize>,
    pub gbt_trees: usize,
    pub gbt_max_depth: Vec<usize>,
    pub gbt_shrinkage: Vec<f64>,
    pub gbt_lambda: f64,
    pub gbt_min_child_weight: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            lr_lambda: vec![0.01, 0.1, 1.0],
            rf_trees: 200,
            rf_max_depth: vec![0, 8],
            gbt_trees: 200,
            gbt_max_depth: vec![3, 5],
            gbt_shrinkage: vec![0.05, 0.1],
            gbt_lambda: 1.0,
            gbt_min_child_weight: 1.0,
        }
    }
}

impl GridConfig {
    /// Grid points of one model kind in a fixed order.
    pub fn points(&self, kind: ModelKind) -> Vec<Hyper> {
        match kind {
            ModelKind::Lr => self.lr_lambda.iter().map(|&lambda| Hyper::Lr { lambda }).collect(),
            ModelKind::Rf => self
                .rf_max_depth
                .iter()
                .map(|&d| Hyper::Rf { n_trees: self.rf_trees, max_depth: (d > 0).then_some(d), mtry: None })
                .collect(),
            ModelKind::Gbt => {
                let mut out = Vec::new();
                for &max_depth in &self.gbt_max_depth {
                    for &shrinkage in &self.gbt_shrinkage {
                        out.push(Hyper::Gbt {
                            n_trees: self.gbt_trees,
                            max_depth,
                            shrinkage,
                            lambda: self.gbt_lambda,
                            min_child_weight: self.gbt_min_child_weight,
                        });
                    }
                }
                out
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.lr_lambda.is_empty() || self.rf_max_depth.is_empty() || self.gbt_max_depth.is_empty() {
            return bad("every grid needs at least one point");
        }
        if self.gbt_shrinkage.is_empty() {
            return bad("gbt_shrinkage needs at least one value");
        }
        if self.lr_lambda.iter().any(|&l| !(l >= 0.0 && l.is_finite())) {
            return bad("lr_lambda values must be finite and >= 0");
        }
        if self.rf_trees == 0 || self.gbt_trees == 0 {
            return bad("tree counts must be positive");
        }
        if self.gbt_shrinkage.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return bad("gbt_shrinkage values must lie in (0, 1]");
        }
        if !(self.gbt_lambda >= 0.0) || !(self.gbt_min_child_weight >= 0.0) {
            return bad("gbt_lambda and gbt_min_child_weight must be >= 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub train_fraction: f64,
    pub train_window: Option<i32>,
    pub cv_folds: usize,
    pub models: Vec<ModelKind>,
    pub grid: GridConfig,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            train_fraction: 0.8,
            train_window: None,
            cv_folds: 10,
            models: ModelKind::ALL.to_vec(),
            grid: GridConfig::default(),
            seed: 7,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cv_folds < 2 {
            return Err(Error::Config(format!("cv_folds {} must be at least 2", self.cv_folds)));
        }
        if self.models.is_empty() {
            return Err(Error::Config("no model kinds selected".into()));
        }
        self.grid.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridScore {
    pub hyper: Hyper,
    pub cv_auroc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub target: String,
    pub kind: ModelKind,
    pub hyper: Hyper,
    pub grid: Vec<GridScore>,
    pub train_window: i32,
    pub test_window: i32,
    pub n_train: usize,
    pub n_train_balanced: usize,
    pub n_test: usize,
    pub test_positive_rate: f64,
    pub metrics: Metrics,
    /// Tree models only.
    pub importance: Option<Vec<FeatureImportance>>,
    /// LR only: whether Newton's method met the gradient tolerance.
    pub converged: Option<bool>,
}

/// Stratified fold assignment: each class is shuffled and dealt round
/// robin.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut fold = vec![0; y.len()];
    let mut r = rng::stream(seed, "cv.folds", 0);
    let mut next = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut r);
        for i in idx {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// Mean held-out AUROC over the folds. Folds whose held-out part has one
/// class are skipped.
pub fn cross_validate(hyper: &Hyper, x: &Matrix, y: &[bool], folds: &[usize], k: usize, seed: u64) -> f64 {
    let mut total = 0.0;
    let mut used = 0;
    for f in 0..k {
        let train: Vec<usize> = (0..y.len()).filter(|&i| folds[i] != f).collect();
        let held: Vec<usize> = (0..y.len()).filter(|&i| folds[i] == f).collect();
        let y_train: Vec<bool> = train.iter().map(|&i| y[i]).collect();
        let y_held: Vec<bool> = held.iter().map(|&i| y[i]).collect();
        if !y_train.contains(&true) || !y_train.contains(&false) {
            continue;
        }
        let params = fit(hyper, &x.select_rows(&train), &y_train, rng::derive_seed(seed, &format!("cv.fold{f}")));
        if let Some(a) = auroc(&params.predict(&x.select_rows(&held)), &y_held) {
            total += a;
            used += 1;
        }
    }
    if used == 0 {
        0.5
    } else {
        total / used as f64
    }
}

/// Everything shared by the model kinds of one target.
pub struct PreparedTarget {
    pub imputer: Imputer,
    pub x_train: Matrix,
    pub y_train: Vec<bool>,
    pub x_test: Matrix,
    pub y_test: Vec<bool>,
    pub folds: Vec<usize>,
    pub n_train: usize,
    pub train_window: i32,
    pub test_window: i32,
}

pub fn prepare_target(data: &Dataset, target: &[Option<bool>], cfg: &ProtocolConfig, seed: u64) -> Result<PreparedTarget> {
    if target.len() != data.n_rows() {
        return Err(Error::Dataset(format!("target has {} rows, dataset {}", target.len(), data.n_rows())));
    }
    let known: Vec<bool> = target.iter().flatten().copied().collect();
    if !known.contains(&true) || !known.contains(&false) {
        return Err(Error::SingleClass("target has one class".into()));
    }
    let plan = SplitPlan { train_fraction: cfg.train_fraction, train_window: cfg.train_window, seed };
    let split = split_out_of_time(&data.time_keys, target, &plan)?;
    let balanced = balance_training(&split.train, target, seed)?;
    let rows = |idx: &[usize]| idx.iter().map(|&i| data.rows[i].as_slice()).collect::<Vec<_>>();
    let imputer = Imputer::fit(&data.feature_names, &rows(&balanced));
    let x_train = imputer.transform(&rows(&balanced));
    let y_train: Vec<bool> = balanced.iter().map(|&i| target[i] == Some(true)).collect();
    let x_test = imputer.transform(&rows(&split.test));
    let y_test: Vec<bool> = split.test.iter().map(|&i| target[i] == Some(true)).collect();
    let folds = stratified_folds(&y_train, cfg.cv_folds, seed);
    Ok(PreparedTarget {
        imputer,
        x_train,
        y_train,
        x_test,
        y_test,
        folds,
        n_train: split.train.len(),
        train_window: split.train_window,
        test_window: split.test_window,
    })
}

/// Grid search, refit and evaluate one model kind.
pub fn train_and_evaluate(
    name: &str,
    prep: &PreparedTarget,
    kind: ModelKind,
    cfg: &ProtocolConfig,
    seed: u64,
) -> Result<(EvalReport, TrainedModel)> {
    let mut grid = Vec::new();
    for hyper in cfg.grid.points(kind) {
        let cv_auroc = cross_validate(&hyper, &prep.x_train, &prep.y_train, &prep.folds, cfg.cv_folds, seed);
        grid.push(GridScore { hyper, cv_auroc });
    }
    let mut best = 0;
    for (i, g) in grid.iter().enumerate() {
        if g.cv_auroc > grid[best].cv_auroc {
            best = i;
        }
    }
    let hyper = grid[best].hyper.clone();
    let fit_seed = rng::derive_seed(seed, "refit");
    let params = fit(&hyper, &prep.x_train, &prep.y_train, fit_seed);
    let converged = match &params {
        Params::Lr { fit, .. } => {
            if !fit.converged {
                log::warn!("{name}/{kind}: logistic fit stopped at {} iterations", fit.iterations);
            }
            Some(fit.converged)
        }
        _ => None,
    };
    let scores = params.predict(&prep.x_test);
    let metrics = evaluate_scores(&scores, &prep.y_test);
    let model = TrainedModel::new(hyper.clone(), prep.imputer.clone(), params, fit_seed);
    let importance = model.importance().ok();
    let positives = prep.y_test.iter().filter(|&&v| v).count();
    let report = EvalReport {
        target: name.to_string(),
        kind,
        hyper,
        grid,
        train_window: prep.train_window,
        test_window: prep.test_window,
        n_train: prep.n_train,
        n_train_balanced: prep.y_train.len(),
        n_test: prep.y_test.len(),
        test_positive_rate: positives as f64 / prep.y_test.len().max(1) as f64,
        metrics,
        importance,
        converged,
    };
    Ok((report, model))
}

/// Run every configured model kind on one target.
pub fn run_target(
    data: &Dataset,
    name: &str,
    target: &[Option<bool>],
    cfg: &ProtocolConfig,
) -> Result<Vec<(EvalReport, TrainedModel)>> {
    cfg.validate()?;
    let seed = rng::derive_seed(cfg.seed, &format!("learn.{name}"));
    let prep = prepare_target(data, target, cfg, seed)?;
    cfg.models.iter().map(|&kind| train_and_evaluate(name, &prep, kind, cfg, seed)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedTarget {
    pub target: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct MatrixResult {
    pub reports: Vec<EvalReport>,
    pub models: Vec<TrainedModel>,
    pub skipped: Vec<SkippedTarget>,
}

/// Run the protocol for each named target. Each target may drop columns
/// listed in `exclusions` (for example the features its label is defined
/// from). Targets that cannot be trained are listed as skipped.
pub fn run_matrix(
    data: &Dataset,
    targets: &[(String, Vec<Option<bool>>)],
    exclusions: &BTreeMap<String, Vec<String>>,
    cfg: &ProtocolConfig,
) -> Result<MatrixResult> {
    cfg.validate()?;
    let mut out = MatrixResult::default();
    for (name, target) in targets {
        let view = match exclusions.get(name) {
            Some(drop) if !drop.is_empty() => data.without_features(drop),
            _ => data.clone(),
        };
        match run_target(&view, name, target, cfg) {
            Ok(results) => {
                for (report, model) in results {
                    out.reports.push(report);
                    out.models.push(model);
                }
            }
            Err(e @ (Error::SingleClass(_) | Error::NoLaterWindow | Error::Dataset(_))) => {
                log::warn!("skipping target {name}: {e}");
                out.skipped.push(SkippedTarget { target: name.clone(), reason: e.to_string() });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
