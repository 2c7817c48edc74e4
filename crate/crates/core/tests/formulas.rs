mod oracles;

use fvkit_core::features::{burstiness, persistence, volatility};
use oracles::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn formulas_match_brute_force_on_random_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let iv = random_intervals(&mut rng);
        assert!(close(persistence(&iv), oracle_persistence(&iv), 1e-9), "{iv:?}");
        let gaps = random_gaps(&mut rng);
        assert!(close(burstiness(&gaps), oracle_burstiness(&gaps), 1e-9), "{gaps:?}");
        let values = random_values(&mut rng);
        assert!(close(volatility(&values), oracle_volatility(&values), 1e-9), "{values:?}");
    }
}

#[test]
fn analytic_anchors() {
    assert_eq!(burstiness(&[3.0, 3.0, 3.0, 3.0]), Some(-1.0));
    // sigma / mu = 1
    assert!((volatility(&[0.0, 2.0]).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    let p = persistence(&[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
    assert!((p - 0.5f64.sqrt()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn burstiness_is_bounded(gaps in prop::collection::vec(0u32..50, 2..40)) {
        let g: Vec<f64> = gaps.iter().map(|&x| x as f64).collect();
        if let Some(b) = burstiness(&g) {
            prop_assert!((-1.0..1.0).contains(&b));
        }
    }

    #[test]
    fn volatility_is_bounded_and_scale_free(
        values in prop::collection::vec(1.0f64..1e6, 2..40),
        scale in 0.001f64..1000.0,
    ) {
        let v = volatility(&values).unwrap();
        prop_assert!((0.0..1.0).contains(&v));
        let scaled: Vec<f64> = values.iter().map(|x| x * scale).collect();
        prop_assert!((volatility(&scaled).unwrap() - v).abs() < 1e-9);
    }

    #[test]
    fn persistence_is_bounded_and_scale_free(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..100.0, 3), 2..12),
        scale in 0.01f64..100.0,
    ) {
        if let Some(p) = persistence(&rows) {
            prop_assert!((0.0..=1.0).contains(&p));
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x * scale).collect()).collect();
            prop_assert!((persistence(&scaled).unwrap() - p).abs() < 1e-9);
        }
    }
}
