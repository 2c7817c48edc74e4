use fvkit_segment::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(rng: &mut ChaCha8Rng, n: usize, d: usize, center: &[f64], sd: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..d).map(|j| center[j] + sd * rng.sample::<f64, _>(StandardNormal)).collect()).collect()
}

fn blobs(k: usize, per: usize, d: usize, seed: u64) -> (Points, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut truth = Vec::new();
    for c in 0..k {
        let center: Vec<f64> = (0..d).map(|j| if j == c % d { 20.0 * (1 + c / d) as f64 } else { 0.0 }).collect();
        rows.extend(gaussian(&mut rng, per, d, &center, 1.0));
        truth.extend(std::iter::repeat_n(c, per));
    }
    (Points::from_rows(&rows), truth)
}

#[test]
fn pca_of_a_line() {
    let rows: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 * 0.3, i as f64 * 0.3]).collect();
    let m = fit_pca(&Points::from_rows(&rows), Components::VarianceTarget(0.99)).unwrap();
    assert!((m.explained_ratio[0] - 1.0).abs() < 1e-9);
    assert_eq!(m.n_components, 1);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    assert!((m.loadings[0][0].abs() - h).abs() < 1e-9 && (m.loadings[0][1].abs() - h).abs() < 1e-9);
    assert_eq!(m.loadings[0][0].signum(), m.loadings[0][1].signum());
}

#[test]
fn isotropic_ratios_are_equal() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = Points::from_rows(&gaussian(&mut rng, 10_000, 3, &[0.0; 3], 1.0));
    let m = fit_pca(&x, Components::Count(3)).unwrap();
    for r in &m.explained_ratio {
        assert!((r - 1.0 / 3.0).abs() < 0.02, "{r}");
    }
}

#[test]
fn full_variance_target_gives_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // five columns spanning a rank-3 space
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| {
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let c: f64 = rng.random_range(-1.0..1.0);
            vec![a, b, c, a + b, b - 2.0 * c]
        })
        .collect();
    let m = fit_pca(&Points::from_rows(&rows), Components::VarianceTarget(1.0)).unwrap();
    assert_eq!(m.n_components, 3);
}

#[test]
fn loadings_orthonormal_and_reconstruction_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| {
            let a: f64 = rng.sample(StandardNormal);
            vec![a, 2.0 * a + rng.sample::<f64, _>(StandardNormal), rng.random_range(0.0..5.0), 7.0, rng.sample(StandardNormal)]
        })
        .collect();
    let x = Points::from_rows(&rows);
    let m = fit_pca(&x, Components::Count(4)).unwrap();
    assert_eq!(m.kept, vec![0, 1, 2, 4]);
    for (a, va) in m.loadings.iter().enumerate() {
        for (b, vb) in m.loadings.iter().enumerate() {
            let dot: f64 = va.iter().zip(vb).map(|(p, q)| p * q).sum();
            assert!((dot - f64::from(u8::from(a == b))).abs() < 1e-8);
        }
    }
    assert!(m.explained_ratio.windows(2).all(|w| w[0] >= w[1]));
    assert!(m.explained_ratio.iter().sum::<f64>() <= 1.0 + 1e-9);
    let back = m.back_project(&m.project(&x, m.loadings.len()));
    for i in 0..x.n {
        for (a, b) in back.row(i).iter().zip(m.standardize_row(x.row(i))) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn pca_needs_two_rows() {
    assert!(matches!(fit_pca(&Points::from_rows(&[vec![1.0, 2.0]]), Components::Count(1)), Err(Error::TooFewRows(1))));
}

#[test]
fn two_cluster_example() {
    let x = Points::from_rows(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![10.0, 10.0], vec![10.0, 11.0]]);
    let m = kmeans(&x, 2, 1, &KMeansConfig::default()).unwrap();
    assert_eq!(m.centroids.row(0), &[0.0, 0.5]);
    assert_eq!(m.centroids.row(1), &[10.0, 10.5]);
    assert_eq!(m.inertia, 1.0);
}

#[test]
fn singleton_clusters_have_zero_inertia() {
    let (x, _) = blobs(2, 6, 2, 4);
    let m = kmeans(&x, x.n, 0, &KMeansConfig::default()).unwrap();
    assert_eq!(m.inertia, 0.0);
}

#[test]
fn duplicated_points_keep_centroids() {
    let (x, _) = blobs(3, 30, 2, 5);
    let mut doubled = x.clone();
    doubled.data.extend_from_slice(&x.data);
    doubled.n *= 2;
    let a = kmeans(&x, 3, 9, &KMeansConfig::default()).unwrap();
    let b = kmeans(&doubled, 3, 9, &KMeansConfig::default()).unwrap();
    for (p, q) in a.centroids.data.iter().zip(&b.centroids.data) {
        assert!((p - q).abs() < 1e-9);
    }
}

#[test]
fn k_above_distinct_points_is_an_error() {
    let x = Points::from_rows(&[vec![1.0], vec![1.0], vec![2.0]]);
    assert!(matches!(kmeans(&x, 3, 0, &KMeansConfig::default()), Err(Error::TooFewDistinct { k: 3, distinct: 2 })));
}

#[test]
fn five_blobs_select_five() {
    let (x, truth) = blobs(5, 60, 4, 6);
    let s = select_k(&x, 2..=8, 3, &KMeansConfig::default()).unwrap();
    assert_eq!(s.recommended, 5);
    assert!(!s.weak_structure);
    assert!(s.diagnostics.windows(2).all(|w| w[1].inertia <= w[0].inertia));
    assert!(adjusted_rand_index(&s.model(5).unwrap().assignments, &truth) > 0.99);
    for m in &s.models {
        for log in &m.inertia_logs {
            assert!(log.windows(2).all(|w| w[1] <= w[0]), "{log:?}");
        }
    }
}

#[test]
fn one_blob_is_weak_structure() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = Points::from_rows(&gaussian(&mut rng, 300, 10, &[0.0; 10], 1.0));
    let s = select_k(&x, 2..=6, 1, &KMeansConfig::default()).unwrap();
    assert!(s.weak_structure);
    assert!(s.diagnostics.iter().all(|d| d.silhouette < WEAK_STRUCTURE));
}

#[test]
fn k_range_is_checked() {
    let (x, _) = blobs(2, 10, 2, 1);
    assert!(matches!(select_k(&x, 1..=4, 0, &KMeansConfig::default()), Err(Error::KRange(1, 4))));
    assert!(matches!(select_k(&x, 2..=13, 0, &KMeansConfig::default()), Err(Error::KRange(2, 13))));
}

#[test]
fn silhouettes_lie_in_unit_interval() {
    let (x, _) = blobs(3, 40, 3, 8);
    let m = kmeans(&x, 4, 2, &KMeansConfig::default()).unwrap();
    assert!(silhouette_samples(&x, &m.assignments, 4).iter().all(|s| (-1.0..=1.0).contains(s)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn clustering_ignores_row_order(seed in 0u64..1000) {
        let (x, _) = blobs(3, 25, 2, seed);
        let mut order: Vec<usize> = (0..x.n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 1));
        let shuffled = x.select(&order);
        let a = kmeans(&x, 3, 4, &KMeansConfig::default()).unwrap();
        let b = kmeans(&shuffled, 3, 4, &KMeansConfig::default()).unwrap();
        let a_in_shuffled: Vec<usize> = order.iter().map(|&i| a.assignments[i]).collect();
        prop_assert!(same_partition(&a_in_shuffled, &b.assignments));
    }
}

#[test]
fn tsne_separates_two_blobs() {
    let (x, truth) = blobs(2, 40, 5, 10);
    let cfg = TsneConfig { perplexity: Some(10.0), iterations: 500, ..TsneConfig::default() };
    let e = tsne_embed(&x, 3, &cfg).unwrap();
    assert_eq!(e, tsne_embed(&x, 3, &cfg).unwrap());
    // the centroid bisector separates the two groups
    let mean = |c: usize| {
        let idx: Vec<usize> = (0..x.n).filter(|&i| truth[i] == c).collect();
        let s = idx.iter().fold([0.0, 0.0], |a, &i| [a[0] + e.row(i)[0], a[1] + e.row(i)[1]]);
        [s[0] / idx.len() as f64, s[1] / idx.len() as f64]
    };
    let (m0, m1) = (mean(0), mean(1));
    let dir = [m1[0] - m0[0], m1[1] - m0[1]];
    let mid = [(m0[0] + m1[0]) / 2.0, (m0[1] + m1[1]) / 2.0];
    for i in 0..x.n {
        let side = (e.row(i)[0] - mid[0]) * dir[0] + (e.row(i)[1] - mid[1]) * dir[1];
        assert_eq!(side > 0.0, truth[i] == 1);
    }
}

#[test]
fn tsne_rejects_large_perplexity() {
    let (x, _) = blobs(2, 25, 2, 1);
    let err = tsne_embed(&x, 0, &TsneConfig { perplexity: Some(30.0), ..TsneConfig::default() }).unwrap_err();
    assert!(err.to_string().starts_with("perplexity too large"), "{err}");
    assert!(err.to_string().contains("16.33"));
}

#[test]
fn profile_matches_group_by() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let n = 500;
    let assignments: Vec<usize> = (0..n).map(|_| rng.random_range(0..5)).collect();
    let values: Vec<Option<f64>> = (0..n).map(|_| rng.random_bool(0.9).then(|| rng.random_range(-50.0..50.0))).collect();
    let has_child: Vec<Option<f64>> = assignments.iter().map(|&a| Some(if a == 2 { 1.0 } else { 0.0 })).collect();
    let cols = [Column { name: "v".into(), values: values.clone() }, Column { name: "has_child".into(), values: has_child }];
    let p = profile_clusters(&assignments, 5, &cols).unwrap();
    assert!((p.shares.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(p.rows[1].means[2], Some(1.0));
    assert_eq!(p.rows[1].max_cluster, Some(2));
    for c in 0..5 {
        let members: Vec<f64> = (0..n).filter(|&i| assignments[i] == c).filter_map(|i| values[i]).collect();
        let oracle = members.iter().sum::<f64>() / members.len() as f64;
        assert!((p.rows[0].means[c].unwrap() - oracle).abs() < 1e-9);
    }
    let r = radar(&p, 2, 0).unwrap();
    assert_eq!(r.iter().find(|r| r.name == "has_child").map(|r| (r.a, r.b)), Some((1.0, 0.0)));
}

#[test]
fn empty_cluster_is_an_error() {
    let cols = [Column { name: "v".into(), values: vec![Some(1.0); 3] }];
    assert!(matches!(profile_clusters(&[0, 0, 2], 3, &cols), Err(Error::EmptyCluster(1))));
}

#[test]
fn ari_reference_values() {
    assert!((adjusted_rand_index(&[0, 0, 0, 1, 1, 1], &[0, 0, 1, 1, 2, 2]) - 8.0 / 33.0).abs() < 1e-12);
    assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &["b", "b", "a", "a"]), 1.0);
}

#[test]
fn pipeline_is_deterministic_and_order_free() {
    let (x, _) = blobs(3, 30, 4, 13);
    let names: Vec<String> = (0..4).map(|j| format!("f{j}")).collect();
    let rows: Vec<Vec<Option<f64>>> = x.rows().map(|r| r.iter().map(|&v| Some(v)).collect()).collect();
    let cfg = SegmentConfig { k_max: 6, tsne: TsneConfig { iterations: 200, ..TsneConfig::default() }, ..SegmentConfig::default() };
    let a = segment(&names, &rows, 5, &cfg).unwrap();
    assert_eq!(a.k, 3);
    let rev: Vec<Vec<Option<f64>>> = rows.iter().rev().cloned().collect();
    let b = segment(&names, &rev, 5, &cfg).unwrap();
    let b_back: Vec<usize> = b.assignments.iter().rev().copied().collect();
    assert_eq!(a.assignments, b_back);
    let e = a.embedding.unwrap();
    let eb = b.embedding.unwrap();
    assert_eq!(e.row(0), eb.row(x.n - 1));
}
