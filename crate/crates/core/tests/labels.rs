mod oracles;

use chrono::NaiveDate;
use fvkit_core::features::{build_feature_vector, FeatureConfig};
use fvkit_core::labels::{label_account, FviLabelSet, LabelThresholds};
use fvkit_core::taxonomy::Category;
use fvkit_core::{AccountHistory, KeywordRuleSet};
use oracles::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn labels(h: &AccountHistory, th: &LabelThresholds) -> FviLabelSet {
    let rules = KeywordRuleSet::builtin();
    let fv = build_feature_vector(h, &rules, &FeatureConfig::default());
    label_account(h, &fv, th)
}

#[test]
fn labelers_match_month_by_month_oracle() {
    let th = LabelThresholds::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut positives = [0usize; 10];
    for i in 0..500 {
        let h = random_history(&mut rng, &format!("A{i}"));
        let got = labels(&h, &th).to_array();
        let want = oracle_labels(&h, &th);
        assert_eq!(got, want, "history {i}");
        for (p, v) in positives.iter_mut().zip(want) {
            *p += usize::from(v == Some(true));
        }
    }
    // the generator exercises both outcomes of every label
    for (name, p) in FviLabelSet::NAMES.iter().zip(positives) {
        assert!(p > 0 && p < 500, "{name}: {p} positives");
    }
}

#[test]
fn half_of_the_months_is_not_more_than_half() {
    let th = LabelThresholds::default();
    let cases: [(&[i64], bool); 4] = [
        (&[0, 0, 20_000, 20_000], false),
        (&[0, 0, 0, 20_000], true),
        (&[0, 0, 0, 0, 0, 0, 20_000, 20_000, 20_000, 20_000, 20_000, 20_000], false),
        (&[0, 0, 0, 0, 0, 0, 0, 20_000, 20_000, 20_000, 20_000, 20_000], true),
    ];
    for (levels, unable) in cases {
        let h = stepped_history("S", levels);
        let l = labels(&h, &th);
        assert_eq!(l.shock_unable, Some(unable), "{levels:?}");
        assert_eq!(oracle_labels(&h, &th)[0], Some(unable));

        let od: Vec<i64> = levels.iter().map(|&v| if v == 0 { -5_000 } else { 5_000 }).collect();
        let h = stepped_history("O", &od);
        assert_eq!(labels(&h, &th).overdraft, Some(unable), "{od:?}");
    }
}

#[test]
fn shock_threshold_is_inclusive() {
    let th = LabelThresholds::default();
    let l = labels(&stepped_history("S", &[10_000; 6]), &th);
    assert_eq!(l.shock_always_withstand, Some(true));
    let l = labels(&stepped_history("S", &[9_999; 6]), &th);
    assert_eq!(l.shock_never_withstand, Some(true));
    assert_eq!(l.shock_unable, Some(true));
}

#[test]
fn one_day_overdraft_does_not_count() {
    let th = LabelThresholds::default();
    let d = |s: &str| s.parse::<NaiveDate>().unwrap();
    let one_day = history_from_rows(
        "A",
        1_000,
        &[(d("2021-01-01"), -2_000, Category::Housing), (d("2021-01-02"), 5_000, Category::Earnings), (d("2021-01-31"), -1, Category::Housing)],
    );
    assert_eq!(labels(&one_day, &th).overdraft_never, Some(true));
    let two_days = history_from_rows(
        "B",
        1_000,
        &[(d("2021-01-01"), -2_000, Category::Housing), (d("2021-01-03"), 5_000, Category::Earnings), (d("2021-01-31"), -1, Category::Housing)],
    );
    assert_eq!(labels(&two_days, &th).overdraft_always, Some(true));
    assert_eq!(oracle_labels(&two_days, &th)[7], Some(true));
}

proptest! {
    #[test]
    fn never_and_always_imply_the_headline_label(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_history(&mut rng, "P");
        prop_assert!(labels(&h, &LabelThresholds::default()).implications_hold());
    }
}
