//! Per-account feature extraction.

use std::collections::BTreeSet;

use chrono::{Datelike, NaiveDate};

use super::formulas::{burstiness, inter_event_gaps, persistence, volatility};
use super::salary::salary_consistency;
use super::schema::{feature_count, feature_defs, feature_index, PERSISTENCE_CATEGORIES, SPEND_CATEGORIES};
use crate::history::AccountHistory;
use crate::ingest::detect_salary_inflows;
use crate::rules::{normalize, KeywordRuleSet, RuleClass, Tags};
use crate::taxonomy::{BenefitType, Category, FlowClass};

/// Default shock threshold: a month withstands a £100 shock when its median
/// end-of-day balance is at least this many pence.
pub const SHOCK_THRESHOLD_PENCE: i64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureConfig {
    pub shock_threshold_pence: i64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { shock_threshold_pence: SHOCK_THRESHOLD_PENCE }
    }
}

/// Engineered profile of one account, in schema column order. `None` marks
/// a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub account_id: String,
    values: Vec<Option<f64>>,
}

impl FeatureVector {
    pub fn new(account_id: impl Into<String>, values: Vec<Option<f64>>) -> Self {
        assert_eq!(values.len(), feature_count(), "feature vector length");
        FeatureVector { account_id: account_id.into(), values }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        feature_index(name).and_then(|i| self.values[i])
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    fn set(&mut self, name: &str, value: Option<f64>) {
        let i = feature_index(name).unwrap_or_else(|| panic!("unknown feature {name}"));
        self.values[i] = value;
    }

    /// Names of features whose value lies outside the declared range.
    pub fn range_violations(&self) -> Vec<&'static str> {
        feature_defs()
            .iter()
            .zip(&self.values)
            .filter(|(d, v)| v.is_some_and(|v| !d.range.contains(v)))
            .map(|(d, _)| d.name.as_str())
            .collect()
    }
}

/// Benefit subtype of a credit: its category, or a keyword tag when a
/// generic inflow carries a benefit reference.
pub fn benefit_type_of(category: Category, amount: i64, tags: Tags) -> Option<BenefitType> {
    if amount <= 0 {
        return None;
    }
    category
        .benefit_type()
        .or_else(|| (category.flow_class() == FlowClass::Inflow).then(|| tags.benefit_type()).flatten())
}

pub fn is_gambling(category: Category, tags: Tags) -> bool {
    category == Category::Gambling || tags.contains(Tags::GAMBLING)
}

/// Month-by-month money totals, in pence, indexed from the first month.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MonthlyTotals {
    pub income: Vec<i64>,
    pub salary: Vec<i64>,
    pub loans_received: Vec<i64>,
    pub fixed: Vec<i64>,
    pub flexible: Vec<i64>,
    /// Expenditure debits per month and category (absolute pence).
    pub by_category: Vec<[i64; Category::COUNT]>,
}

impl MonthlyTotals {
    pub fn months(&self) -> usize {
        self.income.len()
    }

    pub fn total_spend(&self, m: usize) -> i64 {
        self.fixed[m] + self.flexible[m]
    }
}

pub fn monthly_totals(history: &AccountHistory, salary: &[bool]) -> MonthlyTotals {
    let months = history.span_months();
    let mut t = MonthlyTotals {
        income: vec![0; months],
        salary: vec![0; months],
        loans_received: vec![0; months],
        fixed: vec![0; months],
        flexible: vec![0; months],
        by_category: vec![[0; Category::COUNT]; months],
    };
    for (i, tx) in history.transactions.iter().enumerate() {
        let m = history.month_index(tx.date);
        let class = tx.category.flow_class();
        if tx.amount > 0 && class == FlowClass::Inflow {
            t.income[m] += tx.amount;
            if tx.category == Category::LoansReceived {
                t.loans_received[m] += tx.amount;
            }
        }
        if salary[i] {
            t.salary[m] += tx.amount;
        }
        if tx.amount < 0 && class.is_expenditure() {
            let spend = -tx.amount;
            t.by_category[m][tx.category.index()] += spend;
            match class {
                FlowClass::Fixed => t.fixed[m] += spend,
                _ => t.flexible[m] += spend,
            }
        }
    }
    t
}

/// Monthly average of income (excluding loans) minus fixed spend minus
/// groceries and housekeeping, in pence.
pub fn disposable_income(history: &AccountHistory) -> f64 {
    let salary = detect_salary_inflows(history);
    disposable_from_totals(&monthly_totals(history, &salary))
}

fn disposable_from_totals(t: &MonthlyTotals) -> f64 {
    let groceries = Category::GroceriesHousekeeping.index();
    let sum: i64 = (0..t.months())
        .map(|m| t.income[m] - t.loans_received[m] - t.fixed[m] - t.by_category[m][groceries])
        .sum();
    if t.months() == 0 {
        0.0
    } else {
        sum as f64 / t.months() as f64
    }
}

/// End-of-day balance summary per month.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BalanceProfile {
    pub mean: Vec<f64>,
    pub min: Vec<i64>,
    pub max: Vec<i64>,
    pub median: Vec<f64>,
    /// Month touched by a negative-balance spell lasting more than one day.
    pub in_od: Vec<bool>,
    pub od_days: usize,
}

impl BalanceProfile {
    pub fn months(&self) -> usize {
        self.mean.len()
    }
}

fn median_of(values: &mut [i64]) -> f64 {
    values.sort_unstable();
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2] as f64
    } else {
        (values[n / 2 - 1] as f64 + values[n / 2] as f64) / 2.0
    }
}

pub fn balance_profile(history: &AccountHistory) -> BalanceProfile {
    let months = history.span_months();
    let days = history.daily_balances();
    let mut per_month: Vec<Vec<i64>> = vec![Vec::new(); months];
    let mut month_of_day = Vec::with_capacity(days.len());
    for (date, bal) in &days {
        let m = history.month_index(*date);
        per_month[m].push(*bal);
        month_of_day.push(m);
    }
    let mut in_od = vec![false; months];
    let mut od_days = 0;
    let mut run_start = None;
    for (d, (_, bal)) in days.iter().enumerate() {
        if *bal < 0 {
            od_days += 1;
            run_start.get_or_insert(d);
        }
        let run_ends = *bal >= 0 || d + 1 == days.len();
        if run_ends {
            if let Some(start) = run_start.take() {
                let end = if *bal < 0 { d + 1 } else { d };
                if end - start >= 2 {
                    for &m in &month_of_day[start..end] {
                        in_od[m] = true;
                    }
                }
            }
        }
    }
    let mut p = BalanceProfile { in_od, od_days, ..Default::default() };
    for mut values in per_month {
        let n = values.len() as f64;
        p.mean.push(values.iter().map(|&v| v as f64).sum::<f64>() / n);
        p.min.push(*values.iter().min().expect("every month has days"));
        p.max.push(*values.iter().max().expect("every month has days"));
        p.median.push(median_of(&mut values));
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DistressMetrics {
    pub od_days_per_month: f64,
    pub prop_months_in_od: f64,
    pub od_fees: f64,
    pub rdd_per_month: f64,
    pub dm_insolvency_spend: f64,
    pub bnpl_usage: f64,
}

pub fn distress_metrics(history: &AccountHistory) -> DistressMetrics {
    distress_with_profile(history, &balance_profile(history))
}

fn distress_with_profile(history: &AccountHistory, bp: &BalanceProfile) -> DistressMetrics {
    let months = history.span_months().max(1) as f64;
    let (mut fees, mut rdd, mut dm, mut bnpl) = (0i64, 0usize, 0i64, 0i64);
    for (tx, tags) in history.transactions.iter().zip(&history.tags) {
        match tx.category {
            Category::OverdraftFee if tx.amount < 0 => fees -= tx.amount,
            Category::ReturnedDirectDebits => rdd += 1,
            Category::DebtManagementInsolvency if tx.amount < 0 => dm -= tx.amount,
            _ => {}
        }
        if tx.amount < 0 && tags.contains(Tags::BNPL) {
            bnpl -= tx.amount;
        }
    }
    DistressMetrics {
        od_days_per_month: bp.od_days as f64 / months,
        prop_months_in_od: bp.in_od.iter().filter(|&&b| b).count() as f64 / months,
        od_fees: fees as f64 / months,
        rdd_per_month: rdd as f64 / months,
        dm_insolvency_spend: dm as f64 / months,
        bnpl_usage: bnpl as f64 / months,
    }
}

/// Interval vectors for persistence: one series per (spend class or
/// category) with an amount and a count basis.
struct IntervalSeries<const N: usize> {
    amount: Vec<[f64; N]>,
    count: Vec<[f64; N]>,
}

impl<const N: usize> IntervalSeries<N> {
    fn new(intervals: usize) -> Self {
        IntervalSeries { amount: vec![[0.0; N]; intervals], count: vec![[0.0; N]; intervals] }
    }

    fn add(&mut self, interval: usize, slot: usize, amount: i64) {
        self.amount[interval][slot] += amount as f64;
        self.count[interval][slot] += 1.0;
    }
}

/// Monday-based week number.
fn week_number(date: NaiveDate) -> i64 {
    (date.num_days_from_ce() as i64 - 1).div_euclid(7)
}

fn avg(sum: i64, months: f64) -> Option<f64> {
    Some(sum as f64 / months)
}

fn flag(b: bool) -> Option<f64> {
    Some(if b { 1.0 } else { 0.0 })
}

/// Strip digits from a normalised salary reference so changing payslip
/// numbers do not look like distinct employers.
fn salary_source_key(description: &str) -> String {
    let stripped: String = description.chars().filter(|c| !c.is_ascii_digit()).collect();
    normalize(&stripped)
}

/// Compute every feature for one history.
pub fn build_feature_vector(history: &AccountHistory, rules: &KeywordRuleSet, cfg: &FeatureConfig) -> FeatureVector {
    let mut fv = FeatureVector::new(history.account_id.clone(), vec![None; feature_count()]);
    let months_n = history.span_months();
    if months_n == 0 {
        return fv;
    }
    let months = months_n as f64;
    let salary = detect_salary_inflows(history);
    let totals = monthly_totals(history, &salary);
    let bp = balance_profile(history);

    // interval vectors for persistence
    let first_week = week_number(history.first_date().expect("non-empty"));
    let weeks = (week_number(history.last_date().expect("non-empty")) - first_week + 1) as usize;
    let classes = 2 + PERSISTENCE_CATEGORIES.len();
    let mut halves: Vec<IntervalSeries<2>> = (0..classes).map(|_| IntervalSeries::new(months_n)).collect();
    let mut weekdays: Vec<IntervalSeries<7>> = (0..classes).map(|_| IntervalSeries::new(weeks)).collect();
    let mut series_of = [usize::MAX; Category::COUNT];
    for (i, c) in PERSISTENCE_CATEGORIES.iter().enumerate() {
        series_of[c.index()] = 2 + i;
    }

    let mut event_days: [Vec<i64>; 3] = Default::default();
    let (mut exp_count, mut exp_sum) = (0usize, 0i64);
    let (mut gamble_count, mut gamble_in, mut gamble_out) = (0usize, 0i64, 0i64);
    let mut non_salary = 0i64;
    let mut benefits = [0i64; 7];
    let (mut pension_income, mut savings) = (0i64, 0i64);
    let mut payday = false;
    let mut salary_sources = BTreeSet::new();
    let mut providers: [BTreeSet<&str>; 4] = Default::default();
    const PROVIDER_CLASSES: [RuleClass; 4] = [
        RuleClass::TraditionalCard,
        RuleClass::NontraditionalCard,
        RuleClass::TraditionalLoan,
        RuleClass::NontraditionalLoan,
    ];
    const PROVIDER_TAGS: Tags = Tags::TRADITIONAL_CARD
        .union(Tags::NONTRADITIONAL_CARD)
        .union(Tags::TRADITIONAL_LOAN)
        .union(Tags::NONTRADITIONAL_LOAN);

    for (i, (tx, &tags)) in history.transactions.iter().zip(&history.tags).enumerate() {
        let class = tx.category.flow_class();
        let m = history.month_index(tx.date);
        if tx.amount < 0 && class.is_expenditure() {
            let spend = -tx.amount;
            exp_count += 1;
            exp_sum += spend;
            let day = tx.date.num_days_from_ce() as i64;
            event_days[0].push(day);
            let class_series = if class == FlowClass::Fixed { 0 } else { 1 };
            event_days[1 + class_series].push(day);
            let half = usize::from(tx.date.day() > 15);
            let week = (week_number(tx.date) - first_week) as usize;
            let weekday = tx.date.weekday().num_days_from_monday() as usize;
            for s in [class_series, series_of[tx.category.index()]] {
                if s != usize::MAX {
                    halves[s].add(m, half, spend);
                    weekdays[s].add(week, weekday, spend);
                }
            }
        }
        if is_gambling(tx.category, tags) {
            if tx.amount < 0 {
                gamble_count += 1;
                gamble_out -= tx.amount;
            } else {
                gamble_in += tx.amount;
            }
        }
        let benefit = benefit_type_of(tx.category, tx.amount, tags);
        if let Some(b) = benefit {
            benefits[b.index()] += tx.amount;
        }
        if tx.amount > 0 && tx.category.is_salary_source() && !salary[i] && benefit.is_none() {
            non_salary += tx.amount;
        }
        if salary[i] {
            salary_sources.insert(salary_source_key(&tx.description));
        }
        match tx.category {
            Category::PensionIncome if tx.amount > 0 => pension_income += tx.amount,
            Category::SavingsInvestments | Category::DebitInternalTransfers if tx.amount < 0 => {
                savings -= tx.amount
            }
            _ => {}
        }
        payday |= tags.contains(Tags::PAYDAY);
        if tags.intersects(PROVIDER_TAGS) {
            let norm = normalize(&tx.description);
            for (set, class) in providers.iter_mut().zip(PROVIDER_CLASSES) {
                set.extend(rules.matched_terms(&norm, class));
            }
        }
    }

    let sum = |v: &[i64]| v.iter().sum::<i64>();
    let cat_sum = |c: Category| totals.by_category.iter().map(|row| row[c.index()]).sum::<i64>();
    let income_total = sum(&totals.income);

    // inflow
    fv.set("income_total", avg(income_total, months));
    fv.set("income_salary", avg(sum(&totals.salary), months));
    fv.set("income_non_salary", avg(non_salary, months));
    fv.set("salary_sources", Some(salary_sources.len() as f64));
    let consistency = salary_consistency(history, &salary);
    fv.set("salary_consistent_monthly", flag(consistency.monthly));
    fv.set("salary_consistent_weekly", flag(consistency.weekly));

    // outflow
    let fixed = sum(&totals.fixed);
    let flexible = sum(&totals.flexible);
    fv.set("spend_total", avg(fixed + flexible, months));
    fv.set("spend_fixed", avg(fixed, months));
    fv.set("spend_flexible", avg(flexible, months));
    fv.set("spend_tx_count", Some(exp_count as f64 / months));
    fv.set("spend_tx_mean", (exp_count > 0).then(|| exp_sum as f64 / exp_count as f64));
    for c in SPEND_CATEGORIES {
        fv.set(&format!("spend_{}", c.code()), avg(cat_sum(c), months));
    }
    fv.set("gambling_tx_count", Some(gamble_count as f64 / months));
    fv.set("gambling_in", avg(gamble_in, months));
    fv.set("gambling_out", avg(gamble_out, months));

    // temporal
    let class_names: Vec<String> = ["fixed".to_string(), "flexible".to_string()]
        .into_iter()
        .chain(PERSISTENCE_CATEGORIES.iter().map(|c| c.code().to_string()))
        .collect();
    for (s, name) in class_names.iter().enumerate() {
        fv.set(&format!("persistence_monthly_{name}"), persistence(&halves[s].amount));
        fv.set(&format!("persistence_monthly_{name}_count"), persistence(&halves[s].count));
        fv.set(&format!("persistence_weekly_{name}"), persistence(&weekdays[s].amount));
        fv.set(&format!("persistence_weekly_{name}_count"), persistence(&weekdays[s].count));
    }
    for (k, name) in ["all", "fixed", "flexible"].iter().enumerate() {
        fv.set(&format!("burstiness_{name}"), burstiness(&inter_event_gaps(&event_days[k])));
    }
    let as_f64 = |v: &[i64]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
    fv.set("volatility_balance", volatility(&bp.mean));
    fv.set("volatility_income", volatility(&as_f64(&totals.income)));
    fv.set("volatility_salary", volatility(&as_f64(&totals.salary)));
    fv.set("volatility_fixed", volatility(&as_f64(&totals.fixed)));
    fv.set("volatility_flexible", volatility(&as_f64(&totals.flexible)));

    // distress
    let distress = distress_with_profile(history, &bp);
    fv.set("dm_insolvency_spend", Some(distress.dm_insolvency_spend));
    fv.set("od_days_per_month", Some(distress.od_days_per_month));
    fv.set("prop_months_in_od", Some(distress.prop_months_in_od));
    fv.set("od_fees", Some(distress.od_fees));
    fv.set("rdd_per_month", Some(distress.rdd_per_month));
    fv.set("bnpl_spend", Some(distress.bnpl_usage));

    // resilience
    fv.set("balance_mean", Some(bp.mean.iter().sum::<f64>() / months));
    fv.set("balance_min", Some(bp.min.iter().sum::<i64>() as f64 / months));
    fv.set("balance_max", Some(bp.max.iter().sum::<i64>() as f64 / months));
    fv.set("disposable_income", Some(disposable_from_totals(&totals)));
    let withstand = bp.median.iter().filter(|&&m| m >= cfg.shock_threshold_pence as f64).count();
    fv.set("prop_months_shock_withstand", Some(withstand as f64 / months));

    // planning
    let insurance = cat_sum(Category::Insurance);
    let pension = cat_sum(Category::Pension);
    fv.set("insurance_flag", flag(insurance > 0));
    fv.set("insurance_spend", avg(insurance, months));
    fv.set("pension_flag", flag(pension > 0));
    fv.set("pension_spend", avg(pension, months));
    fv.set("savings_amount", avg(savings, months));

    // aid
    for b in BenefitType::ALL {
        let amount = benefits[b.index()];
        fv.set(&format!("benefit_{}_amount", b.code()), avg(amount, months));
        let share = if income_total > 0 {
            Some(amount as f64 / income_total as f64)
        } else if amount == 0 {
            Some(0.0)
        } else {
            None
        };
        fv.set(&format!("benefit_{}_share", b.code()), share);
    }
    fv.set("pension_income", avg(pension_income, months));

    // inclusion
    fv.set("card_providers_traditional", Some(providers[0].len() as f64));
    fv.set("card_providers_nontraditional", Some(providers[1].len() as f64));
    fv.set("loan_providers_traditional", Some(providers[2].len() as f64));
    fv.set("loan_providers_nontraditional", Some(providers[3].len() as f64));
    fv.set("payday_flag", flag(payday));
    fv.set("card_payments", avg(cat_sum(Category::CreditCardPayments), months));
    fv.set("loans_received", avg(sum(&totals.loans_received), months));
    fv.set("loans_paid", avg(cat_sum(Category::LoanRepayments), months));

    fv
}
