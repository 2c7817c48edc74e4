use fvkit_learn::logistic::{fit_logistic, gradient, objective};
use fvkit_learn::model::{fit, importance};
use fvkit_learn::protocol::stratified_folds;
use fvkit_learn::{auroc, run_target, Dataset, Error, Hyper, Matrix, ModelKind, ProtocolConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_pairs_auroc(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let mut credit = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    credit += 1.0;
                } else if scores[i] == scores[j] {
                    credit += 0.5;
                }
            }
        }
    }
    (pairs > 0.0).then(|| credit / pairs)
}

proptest! {
    #[test]
    fn auroc_matches_pair_counting(
        data in prop::collection::vec((0u8..20, any::<bool>()), 1..200)
    ) {
        let scores: Vec<f64> = data.iter().map(|&(s, _)| s as f64 / 20.0).collect();
        let labels: Vec<bool> = data.iter().map(|&(_, l)| l).collect();
        let fast = auroc(&scores, &labels);
        let slow = all_pairs_auroc(&scores, &labels);
        match (fast, slow) {
            (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b),
            (a, b) => prop_assert_eq!(a, b),
        }
    }
}

fn random_problem(rng: &mut ChaCha8Rng, n: usize, p: usize) -> (Matrix, Vec<bool>) {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
    let y = (0..n).map(|_| rng.random_bool(0.4)).collect();
    (Matrix::from_rows(&rows), y)
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let p = rng.random_range(1..6);
        let n = rng.random_range(5..40);
        let (x, y) = random_problem(&mut rng, n, p);
        let lambda = rng.random_range(0.0..1.0);
        for _ in 0..20 {
            let params: Vec<f64> = (0..=p).map(|_| rng.random_range(-1.5..1.5)).collect();
            let g = gradient(&x, &y, &params, lambda);
            let h = 1e-5;
            let numeric: Vec<f64> = (0..=p)
                .map(|k| {
                    let mut up = params.clone();
                    let mut down = params.clone();
                    up[k] += h;
                    down[k] -= h;
                    (objective(&x, &y, &up, lambda) - objective(&x, &y, &down, lambda)) / (2.0 * h)
                })
                .collect();
            let diff: f64 = g.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let scale: f64 = numeric.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-8);
            assert!(diff / scale < 1e-4, "relative error {}", diff / scale);
        }
    }
}

#[test]
fn separable_data_is_fit_exactly() {
    let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64, (i % 7) as f64]).collect();
    let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
    let x = Matrix::from_rows(&rows);
    let f = fit_logistic(&x, &y, 0.01);
    assert!(f.converged);
    let correct = (0..40).filter(|&i| (f.predict_row(x.row(i)) >= 0.5) == y[i]).count();
    assert_eq!(correct, 40);
}

fn cohort_like(n: usize, seed: u64) -> (Dataset, Vec<Option<bool>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut target = Vec::new();
    for _ in 0..n {
        let a: f64 = rng.random_range(0.0..1.0);
        let b: f64 = rng.random_range(0.0..1.0);
        let missing = rng.random_bool(0.1);
        rows.push(vec![Some(a), if missing { None } else { Some(b) }, Some(rng.random_range(0.0..1.0))]);
        target.push(Some(a + 0.3 * b + rng.random_range(-0.2..0.2) > 0.7));
    }
    let keys = (0..n).map(|i| if i < n * 4 / 5 { 100 } else { 101 }).collect();
    let ids = (0..n).map(|i| format!("A{i}")).collect();
    let names = ["a", "b", "noise"].map(String::from).to_vec();
    (Dataset::new(ids, names, rows, keys).unwrap(), target)
}

fn small_config() -> ProtocolConfig {
    let mut cfg = ProtocolConfig::default();
    cfg.cv_folds = 3;
    cfg.grid.rf_trees = 20;
    cfg.grid.gbt_trees = 20;
    cfg
}

#[test]
fn protocol_is_deterministic_and_learns() {
    let (data, target) = cohort_like(400, 5);
    let cfg = small_config();
    let a = run_target(&data, "t", &target, &cfg).unwrap();
    let b = run_target(&data, "t", &target, &cfg).unwrap();
    assert_eq!(a.len(), 3);
    for ((ra, ma), (rb, mb)) in a.iter().zip(&b) {
        assert_eq!(ra, rb);
        assert_eq!(ma.to_json().unwrap(), mb.to_json().unwrap());
        assert!(ra.metrics.auroc.unwrap() > 0.8, "{} {:?}", ra.kind, ra.metrics.auroc);
        assert_eq!(ra.n_test, 80);
    }
    let gbt = &a[2].1;
    let imp = gbt.importance().unwrap();
    let total: f64 = imp.iter().map(|f| f.mean).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!(imp.iter().all(|f| f.mean >= 0.0));
    assert!(gbt.imputer.output_names.contains(&"b_missing".to_string()));
}

#[test]
fn model_json_round_trips() {
    let (data, target) = cohort_like(300, 6);
    for (_, m) in run_target(&data, "t", &target, &small_config()).unwrap() {
        let back = fvkit_learn::TrainedModel::from_json(&m.to_json().unwrap()).unwrap();
        let rows: Vec<&[Option<f64>]> = data.rows.iter().map(|r| r.as_slice()).collect();
        assert_eq!(back.predict_raw(&rows), m.predict_raw(&rows));
        assert!(m.predict_raw(&rows).iter().all(|p| (0.0..=1.0).contains(p)));
    }
}

#[test]
fn constant_target_is_single_class() {
    let (data, _) = cohort_like(100, 1);
    let target = vec![Some(true); 100];
    let err = run_target(&data, "t", &target, &small_config()).unwrap_err();
    assert!(matches!(err, Error::SingleClass(_)));
    assert!(err.to_string().starts_with("single class"));
}

fn binary_copy_problem(n: usize, duplicate: bool) -> (Matrix, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let f = rng.random_bool(0.5);
        let mut row = vec![f64::from(u8::from(f))];
        if duplicate {
            row.push(row[0]);
        }
        row.extend((0..4).map(|_| rng.random_range(0.0..1.0)));
        rows.push(row);
        y.push(f);
    }
    (Matrix::from_rows(&rows), y)
}

#[test]
fn planted_feature_dominates_forest_importance() {
    let (x, y) = binary_copy_problem(300, false);
    let names: Vec<String> = (0..x.n_cols).map(|j| format!("f{j}")).collect();
    let p = fit(&Hyper::Rf { n_trees: 50, max_depth: None, mtry: None }, &x, &y, 9);
    let imp = importance(&p, &names).unwrap();
    assert!(imp[0].mean > 0.9, "{}", imp[0].mean);
}

#[test]
fn duplicated_columns_share_importance() {
    let names = |x: &Matrix| (0..x.n_cols).map(|j| format!("f{j}")).collect::<Vec<_>>();
    let h = Hyper::Rf { n_trees: 50, max_depth: None, mtry: None };
    let (x1, y1) = binary_copy_problem(300, false);
    let single = importance(&fit(&h, &x1, &y1, 9), &names(&x1)).unwrap()[0].mean;
    let (x2, y2) = binary_copy_problem(300, true);
    let imp = importance(&fit(&h, &x2, &y2, 9), &names(&x2)).unwrap();
    let both = imp[0].mean + imp[1].mean;
    assert!((both - single).abs() < 0.05, "{both} vs {single}");
}

#[test]
fn single_split_tree_gives_full_importance() {
    let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![0.0, i as f64]).collect();
    let y: Vec<bool> = (0..20).map(|i| i >= 10).collect();
    let x = Matrix::from_rows(&rows);
    let p = fit(&Hyper::Gbt { n_trees: 1, max_depth: 1, shrinkage: 0.1, lambda: 1.0, min_child_weight: 1.0 }, &x, &y, 0);
    let imp = importance(&p, &["flat".into(), "f".into()]).unwrap();
    assert_eq!((imp[0].mean, imp[1].mean), (0.0, 1.0));
}

#[test]
fn trees_ignore_monotone_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let (x, y) = random_problem(&mut rng, 300, 3);
    let y: Vec<bool> = (0..x.n_rows).map(|i| (x.get(i, 0) * x.get(i, 1) > 0.0) != y[i] && rng.random_bool(0.9) || x.get(i, 2) > 1.5).collect();
    let mut t = x.clone();
    for i in 0..t.n_rows {
        t.set(i, 1, (t.get(i, 1) * 3.0).exp() + 7.0);
    }
    for h in [
        Hyper::Rf { n_trees: 15, max_depth: None, mtry: None },
        Hyper::Gbt { n_trees: 25, max_depth: 3, shrinkage: 0.1, lambda: 1.0, min_child_weight: 1.0 },
    ] {
        let a = fit(&h, &x, &y, 4).predict(&x);
        let b = fit(&h, &t, &y, 4).predict(&t);
        let la: Vec<bool> = a.iter().map(|&s| s >= 0.5).collect();
        let lb: Vec<bool> = b.iter().map(|&s| s >= 0.5).collect();
        assert_eq!(la, lb);
    }
}

#[test]
fn folds_are_stratified() {
    let y: Vec<bool> = (0..100).map(|i| i % 4 == 0).collect();
    let folds = stratified_folds(&y, 10, 1);
    for f in 0..10 {
        let members: Vec<usize> = (0..100).filter(|&i| folds[i] == f).collect();
        assert_eq!(members.len(), 10);
        let pos = members.iter().filter(|&&i| y[i]).count();
        assert!((2..=3).contains(&pos));
    }
}

#[test]
fn model_kind_parses() {
    assert_eq!("gbt".parse::<ModelKind>().unwrap(), ModelKind::Gbt);
    assert!("svm".parse::<ModelKind>().is_err());
}
