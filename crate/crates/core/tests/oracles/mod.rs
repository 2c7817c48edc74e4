//! Brute-force reference implementations and random inputs shared by the
//! integration tests and the acceptance suite.

#![allow(dead_code)]

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate};
use rand::Rng;

use fvkit_core::labels::LabelThresholds;
use fvkit_core::taxonomy::{Category, FlowClass};
use fvkit_core::{AccountHistory, KeywordRuleSet, Transaction};

/// Population variance from all pairwise squared differences.
pub fn pairwise_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            s += (x[i] - x[j]).powi(2);
        }
    }
    s / (n * n)
}

pub fn naive_mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

pub fn oracle_persistence(intervals: &[Vec<f64>]) -> Option<f64> {
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 1..intervals.len() {
        let (a, b) = (&intervals[i - 1], &intervals[i]);
        let norm = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (na, nb) = (norm(a), norm(b));
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        total += dot / (na * nb);
        pairs += 1;
    }
    (pairs > 0).then(|| total / pairs as f64)
}

pub fn oracle_burstiness(gaps: &[f64]) -> Option<f64> {
    if gaps.len() < 2 {
        return None;
    }
    let mu = naive_mean(gaps);
    if mu <= 0.0 {
        return None;
    }
    let r = pairwise_variance(gaps).sqrt() / mu;
    Some((r - 1.0) / (r + 1.0))
}

pub fn oracle_volatility(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mu = naive_mean(values);
    if mu == 0.0 {
        return None;
    }
    let cv2 = pairwise_variance(values) / (mu * mu);
    Some((cv2 / (1.0 + cv2)).sqrt())
}

pub fn random_intervals<R: Rng>(rng: &mut R) -> Vec<Vec<f64>> {
    let n = rng.random_range(0..10);
    let d = rng.random_range(1..8);
    (0..n)
        .map(|_| {
            (0..d)
                .map(|_| if rng.random_bool(0.3) { 0.0 } else { rng.random_range(0.0..500.0) })
                .collect()
        })
        .collect()
}

pub fn random_gaps<R: Rng>(rng: &mut R) -> Vec<f64> {
    let n = rng.random_range(0..30);
    let constant = rng.random_bool(0.1);
    let c = rng.random_range(0..5) as f64;
    (0..n).map(|_| if constant { c } else { rng.random_range(0..20) as f64 }).collect()
}

pub fn random_values<R: Rng>(rng: &mut R) -> Vec<f64> {
    let n = rng.random_range(0..30);
    let shift = rng.random_range(-200.0..1000.0);
    (0..n).map(|_| shift + rng.random_range(-300.0..300.0)).collect()
}

pub fn close(a: Option<f64>, b: Option<f64>, tol: f64) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() <= tol,
        _ => false,
    }
}

fn days_in_month(year: i32, month: u32) -> u32 {
    let next = if month == 12 {
        NaiveDate::from_ymd_opt(year + 1, 1, 1)
    } else {
        NaiveDate::from_ymd_opt(year, month + 1, 1)
    };
    (next.unwrap() - Duration::days(1)).day()
}

const CREDITS: [Category; 5] = [
    Category::Earnings,
    Category::LoansReceived,
    Category::BenefitChild,
    Category::CreditBankTransfers,
    Category::Returns,
];

const DEBITS: [Category; 8] = [
    Category::Housing,
    Category::Utilities,
    Category::GroceriesHousekeeping,
    Category::EatingOutTakeaways,
    Category::Gambling,
    Category::DebtManagementInsolvency,
    Category::ReturnedDirectDebits,
    Category::OverdraftFee,
];

/// Balance levels that straddle the shock and overdraft boundaries.
fn balance_level<R: Rng>(rng: &mut R) -> i64 {
    match rng.random_range(0..6) {
        0 => rng.random_range(-60_000..0),
        1 => rng.random_range(0..10_000),
        2 => 10_000,
        3 => 9_999,
        4 => -1,
        _ => rng.random_range(10_000..80_000),
    }
}

/// History built from explicit (date, amount, category) rows; balances are
/// the running sum from `opening`.
pub fn history_from_rows(id: &str, opening: i64, rows: &[(NaiveDate, i64, Category)]) -> AccountHistory {
    let mut balance = opening;
    let txs = rows
        .iter()
        .map(|&(date, amount, category)| {
            balance += amount;
            Transaction {
                account_id: id.to_string(),
                date,
                amount,
                description: "x".into(),
                category,
                balance_after: balance,
            }
        })
        .collect();
    AccountHistory::new(id, txs, &KeywordRuleSet::builtin())
}

/// A history of one to twelve months. Every month holds transactions;
/// amounts are chosen so balances jump between levels near the label
/// boundaries.
pub fn random_history<R: Rng>(rng: &mut R, id: &str) -> AccountHistory {
    let months = rng.random_range(1..=12);
    let start_year = rng.random_range(2019..=2022);
    let start_month = rng.random_range(1..=12u32);
    let mut rows = Vec::new();
    let mut balance = balance_level(rng);
    let opening = balance;
    for m in 0..months {
        let idx = start_month - 1 + m;
        let (y, mo) = (start_year + (idx / 12) as i32, idx % 12 + 1);
        let dim = days_in_month(y, mo);
        let k = rng.random_range(1..=6);
        let mut days: Vec<u32> = (0..k).map(|_| rng.random_range(1..=dim)).collect();
        days.sort_unstable();
        for day in days {
            let date = NaiveDate::from_ymd_opt(y, mo, day).unwrap();
            let (amount, category) = if rng.random_bool(0.25) {
                let c = DEBITS[rng.random_range(0..DEBITS.len())];
                let amount = match c {
                    Category::Gambling => -rng.random_range(1..30_000),
                    Category::ReturnedDirectDebits => -500,
                    _ => -rng.random_range(1..20_000),
                };
                (amount, c)
            } else {
                let mut amount = balance_level(rng) - balance;
                if amount == 0 {
                    amount = 1;
                }
                let c = if amount > 0 {
                    CREDITS[rng.random_range(0..CREDITS.len())]
                } else {
                    DEBITS[rng.random_range(0..DEBITS.len())]
                };
                (amount, c)
            };
            balance += amount;
            rows.push((date, amount, category));
        }
    }
    history_from_rows(id, opening, &rows)
}

/// A history whose balance is held at one level per month: the level is
/// set by a transaction on the first day of each month and the last
/// month closes with a transaction on its final day.
pub fn stepped_history(id: &str, levels: &[i64]) -> AccountHistory {
    let mut rows = Vec::new();
    let mut balance = 0;
    for (m, &level) in levels.iter().enumerate() {
        let (y, mo) = (2021 + (m / 12) as i32, (m % 12) as u32 + 1);
        let amount = level - balance;
        let category = if amount >= 0 { Category::CreditBankTransfers } else { Category::Housing };
        rows.push((NaiveDate::from_ymd_opt(y, mo, 1).unwrap(), amount, category));
        balance = level;
        if m + 1 == levels.len() {
            let last = NaiveDate::from_ymd_opt(y, mo, days_in_month(y, mo)).unwrap();
            rows.push((last, 0, Category::CreditBankTransfers));
        }
    }
    history_from_rows(id, 0, &rows)
}

/// Naive end-of-day balance for every day of the observation window.
fn naive_daily(h: &AccountHistory) -> Vec<(NaiveDate, i64)> {
    let first = h.transactions.iter().map(|t| t.date).min().unwrap();
    let last = h.transactions.iter().map(|t| t.date).max().unwrap();
    let mut out = Vec::new();
    let mut day = first;
    while day <= last {
        let bal = h.transactions.iter().filter(|t| t.date <= day).last().map(|t| t.balance_after).unwrap();
        out.push((day, bal));
        day += Duration::days(1);
    }
    out
}

fn naive_median(mut v: Vec<i64>) -> f64 {
    v.sort();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

/// The ten labels in the order of `FviLabelSet::NAMES`, computed month by
/// month without the library's balance profile.
pub fn oracle_labels(h: &AccountHistory, th: &LabelThresholds) -> [Option<bool>; 10] {
    let daily = naive_daily(h);
    let mut by_month: BTreeMap<(i32, u32), Vec<usize>> = BTreeMap::new();
    for (i, (d, _)) in daily.iter().enumerate() {
        by_month.entry((d.year(), d.month())).or_default().push(i);
    }
    let months = by_month.len() as i64;

    let mut fail = 0;
    let mut od_months = 0;
    for days in by_month.values() {
        let median = naive_median(days.iter().map(|&i| daily[i].1).collect());
        if median < th.shock_pence as f64 {
            fail += 1;
        }
        let spell_day = |i: usize| {
            daily[i].1 < 0
                && ((i > 0 && daily[i - 1].1 < 0) || (i + 1 < daily.len() && daily[i + 1].1 < 0))
        };
        if days.iter().any(|&i| spell_day(i)) {
            od_months += 1;
        }
    }
    let share = |count: i64| count as f64 > th.month_share * months as f64;

    let mut disposable = 0i64;
    let mut gambling = 0i64;
    let mut rdd = 0i64;
    let mut insolvent = false;
    for t in &h.transactions {
        let class = t.category.flow_class();
        if t.amount > 0 && class == FlowClass::Inflow && t.category != Category::LoansReceived {
            disposable += t.amount;
        }
        if t.amount < 0 && (class == FlowClass::Fixed || t.category == Category::GroceriesHousekeeping) {
            disposable += t.amount;
        }
        if t.category == Category::Gambling && t.amount < 0 {
            gambling -= t.amount;
        }
        if t.category == Category::ReturnedDirectDebits {
            rdd += 1;
        }
        if t.category == Category::DebtManagementInsolvency && t.amount < 0 {
            insolvent = true;
        }
    }
    [
        Some(share(fail)),
        Some(fail == months),
        Some(fail == 0),
        Some(insolvent),
        Some(disposable as f64 / months as f64 <= th.disposable_pence as f64),
        Some(share(od_months)),
        Some(od_months == 0),
        Some(od_months == months),
        Some(rdd as f64 >= th.rdd_per_month * months as f64),
        Some(gambling >= th.gambling_pence * months),
    ]
}
