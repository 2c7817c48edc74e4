mod oracles;

use std::collections::BTreeMap;

use chrono::{Datelike, Duration};
use fvkit_core::features::{build_feature_vector, feature_defs, feature_names, FeatureConfig, FeatureVector};
use fvkit_core::synthgen::{generate_cohort, CohortConfig, PersonaSet};
use fvkit_core::taxonomy::{Category, FlowClass};
use fvkit_core::{AccountHistory, KeywordRuleSet};
use oracles::random_history;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cohort_histories(n: usize, seed: u64) -> Vec<AccountHistory> {
    let cfg = CohortConfig { n_accounts: n, months_per_account: 12, seed, planted_proxy_strength: 0.8 };
    generate_cohort(&cfg, &PersonaSet::builtin()).unwrap().histories(&KeywordRuleSet::builtin())
}

fn features(h: &AccountHistory, cfg: &FeatureConfig) -> FeatureVector {
    build_feature_vector(h, &KeywordRuleSet::builtin(), cfg)
}

/// Reference values for the money-flow and balance columns, computed by
/// direct scans over the transactions and every calendar day.
fn naive_features(h: &AccountHistory) -> BTreeMap<String, f64> {
    let first = h.first_date().unwrap();
    let last = h.last_date().unwrap();
    let month_of = |d: chrono::NaiveDate| (d.year(), d.month());
    let mut months: BTreeMap<(i32, u32), Vec<i64>> = BTreeMap::new();
    let mut day = first;
    let mut negative_days = 0;
    while day <= last {
        let bal = h.transactions.iter().filter(|t| t.date <= day).last().unwrap().balance_after;
        months.entry(month_of(day)).or_default().push(bal);
        negative_days += usize::from(bal < 0);
        day += Duration::days(1);
    }
    let m = months.len() as f64;
    let mut out = BTreeMap::new();
    let mut add = |k: &str, v: f64| {
        *out.entry(k.to_string()).or_insert(0.0) += v;
    };
    for t in &h.transactions {
        let class = t.category.flow_class();
        let a = t.amount as f64;
        if t.amount > 0 && class == FlowClass::Inflow {
            add("income_total", a / m);
        }
        if t.amount < 0 && class.is_expenditure() {
            add("spend_total", -a / m);
            add(if class == FlowClass::Fixed { "spend_fixed" } else { "spend_flexible" }, -a / m);
            add(&format!("spend_{}", t.category.code()), -a / m);
        }
        match t.category {
            Category::ReturnedDirectDebits => add("rdd_per_month", 1.0 / m),
            Category::OverdraftFee if t.amount < 0 => add("od_fees", -a / m),
            Category::DebtManagementInsolvency if t.amount < 0 => add("dm_insolvency_spend", -a / m),
            _ => {}
        }
    }
    let monthly_means: f64 = months.values().map(|v| v.iter().sum::<i64>() as f64 / v.len() as f64).sum();
    add("balance_mean", monthly_means / m);
    add("od_days_per_month", negative_days as f64 / m);
    out
}

#[test]
fn money_and_balance_columns_match_naive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut histories = cohort_histories(30, 9);
    histories.extend((0..100).map(|i| random_history(&mut rng, &format!("R{i}"))));
    let cfg = FeatureConfig::default();
    for h in &histories {
        let fv = features(h, &cfg);
        let want = naive_features(h);
        for name in [
            "income_total", "spend_total", "spend_fixed", "spend_flexible", "rdd_per_month", "od_fees",
            "dm_insolvency_spend", "balance_mean", "od_days_per_month",
        ] {
            let w = want.get(name).copied().unwrap_or(0.0);
            let g = fv.get(name).unwrap();
            assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{} {name}: {g} vs {w}", h.account_id);
        }
        for (name, w) in want.iter().filter(|(k, _)| k.starts_with("spend_") && fv.get(k).is_some()) {
            let g = fv.get(name).unwrap();
            assert!((g - w).abs() <= 1e-9 * w.abs().max(1.0), "{name}");
        }
    }
}

#[test]
fn totals_are_consistent() {
    for h in cohort_histories(40, 2) {
        let fv = features(&h, &FeatureConfig::default());
        let g = |n: &str| fv.get(n).unwrap();
        assert!((g("spend_total") - g("spend_fixed") - g("spend_flexible")).abs() < 1e-6);
        assert!(g("income_salary") + g("income_non_salary") <= g("income_total") + 1e-6);
        assert!(fv.range_violations().is_empty(), "{:?}", fv.range_violations());
        assert_eq!(fv.values().len(), feature_names().count());
    }
}

#[test]
fn shifting_dates_by_a_full_calendar_cycle_changes_nothing() {
    // the Gregorian calendar repeats weekdays and leap years every 28 years
    // between 1901 and 2099
    let cfg = FeatureConfig::default();
    for h in cohort_histories(20, 4) {
        let shifted: Vec<_> = h
            .transactions
            .iter()
            .cloned()
            .map(|mut t| {
                t.date = t.date.with_year(t.date.year() + 28).unwrap();
                t
            })
            .collect();
        let s = AccountHistory::new(h.account_id.clone(), shifted, &KeywordRuleSet::builtin());
        assert_eq!(features(&h, &cfg), features(&s, &cfg));
    }
}

#[test]
fn monetary_columns_scale_with_amounts() {
    // a factor of 1001 keeps every amount's remainder modulo whole pounds,
    // so the round-amount salary rule is unaffected
    let c = 1001i64;
    let base = FeatureConfig::default();
    let scaled_cfg = FeatureConfig { shock_threshold_pence: base.shock_threshold_pence * c };
    let defs = feature_defs();
    for h in cohort_histories(20, 6) {
        let txs: Vec<_> = h
            .transactions
            .iter()
            .cloned()
            .map(|mut t| {
                t.amount *= c;
                t.balance_after *= c;
                t
            })
            .collect();
        let s = AccountHistory::new(h.account_id.clone(), txs, &KeywordRuleSet::builtin());
        let (a, b) = (features(&h, &base), features(&s, &scaled_cfg));
        for (i, d) in defs.iter().enumerate() {
            // salary detection has an absolute minimum amount
            if d.name.starts_with("salary_") || d.name.starts_with("income_") && d.name != "income_total" {
                continue;
            }
            let (x, y) = (a.values()[i], b.values()[i]);
            match (x, y) {
                (Some(x), Some(y)) => {
                    let want = if d.monetary { x * c as f64 } else { x };
                    assert!((y - want).abs() <= 1e-9 * want.abs().max(1.0), "{}: {x} -> {y}", d.name);
                }
                _ => assert_eq!(x.is_some(), y.is_some(), "{}", d.name),
            }
        }
    }
}
