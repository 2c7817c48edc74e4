//! Names, groups and value ranges of every engineered feature.

use std::collections::HashMap;
use std::sync::OnceLock;

use serde::Serialize;

use crate::taxonomy::{BenefitType, Category};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureGroup {
    Inflow,
    Outflow,
    Temporal,
    Distress,
    Resilience,
    Planning,
    Aid,
    Inclusion,
}

/// Admissible values of a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Range {
    /// `>= 0`
    NonNegative,
    /// any finite value (signed balances, disposable income)
    Signed,
    /// `[0, 1]`
    Unit,
    /// `[-1, 1]`
    Burstiness,
    /// `[0, 1)`
    Volatility,
}

impl Range {
    pub fn contains(self, v: f64) -> bool {
        v.is_finite()
            && match self {
                Range::NonNegative => v >= 0.0,
                Range::Signed => true,
                Range::Unit => (0.0..=1.0).contains(&v),
                Range::Burstiness => (-1.0..=1.0).contains(&v),
                Range::Volatility => (0.0..1.0).contains(&v),
            }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FeatureDef {
    pub name: String,
    pub group: FeatureGroup,
    pub units: &'static str,
    pub range: Range,
    /// True for amounts in pence; these scale with the transaction amounts.
    pub monetary: bool,
    pub formula: String,
}

/// Spending categories with their own `spend_*` column. The remaining
/// expenditure categories are covered by dedicated planning, distress and
/// inclusion columns.
pub const SPEND_CATEGORIES: [Category; 15] = [
    Category::Cash,
    Category::CharityDonation,
    Category::ChildSchool,
    Category::EatingOutTakeaways,
    Category::FashionBeauty,
    Category::FunLeisure,
    Category::GroceriesHousekeeping,
    Category::HealthFitness,
    Category::Housing,
    Category::MedicalHealth,
    Category::Subscriptions,
    Category::TransportFuel,
    Category::Utilities,
    Category::Gambling,
    Category::OtherExpenditure,
];

/// Spending categories with per-category persistence columns.
pub const PERSISTENCE_CATEGORIES: [Category; 13] = [
    Category::Cash,
    Category::CharityDonation,
    Category::ChildSchool,
    Category::EatingOutTakeaways,
    Category::FashionBeauty,
    Category::FunLeisure,
    Category::GroceriesHousekeeping,
    Category::HealthFitness,
    Category::Housing,
    Category::MedicalHealth,
    Category::Subscriptions,
    Category::TransportFuel,
    Category::Utilities,
];

const PM: &str = "pence/month";

struct Builder(Vec<FeatureDef>);

impl Builder {
    fn add(&mut self, name: impl Into<String>, group: FeatureGroup, units: &'static str, range: Range, formula: impl Into<String>) {
        let monetary = units.starts_with("pence");
        self.0.push(FeatureDef { name: name.into(), group, units, range, monetary, formula: formula.into() });
    }
}

fn build() -> Vec<FeatureDef> {
    use FeatureGroup::*;
    use Range::*;
    let mut b = Builder(Vec::new());

    b.add("income_total", Inflow, PM, NonNegative, "sum of inflow-class credits / months");
    b.add("income_salary", Inflow, PM, NonNegative, "sum of salary-flagged credits / months");
    b.add("income_non_salary", Inflow, PM, NonNegative, "earnings and bank-transfer credits not flagged salary / months");
    b.add("salary_sources", Inflow, "count", NonNegative, "distinct salary references (digits removed)");
    b.add("salary_consistent_monthly", Inflow, "flag", Unit, ">70% of salary within one 10-day day-of-month window");
    b.add("salary_consistent_weekly", Inflow, "flag", Unit, ">70% of salary within one 3-day day-of-week window");

    b.add("spend_total", Outflow, PM, NonNegative, "fixed + flexible debits / months");
    b.add("spend_fixed", Outflow, PM, NonNegative, "fixed-class debits / months");
    b.add("spend_flexible", Outflow, PM, NonNegative, "flexible-class debits / months");
    b.add("spend_tx_count", Outflow, "count/month", NonNegative, "expenditure debits / months");
    b.add("spend_tx_mean", Outflow, "pence", NonNegative, "mean absolute expenditure debit");
    for c in SPEND_CATEGORIES {
        b.add(format!("spend_{}", c.code()), Outflow, PM, NonNegative, format!("{} debits / months", c.code()));
    }
    b.add("gambling_tx_count", Outflow, "count/month", NonNegative, "gambling debits (category or keyword) / months");
    b.add("gambling_in", Outflow, PM, NonNegative, "gambling credits / months");
    b.add("gambling_out", Outflow, PM, NonNegative, "gambling debits / months");

    for (basis, suffix) in [("amount", ""), ("count", "_count")] {
        for period in ["monthly", "weekly"] {
            for class in ["fixed", "flexible"] {
                b.add(
                    format!("persistence_{period}_{class}{suffix}"),
                    Temporal,
                    "index",
                    Unit,
                    format!("mean adjacent cosine of {period} interval {basis} vectors, {class} spend"),
                );
            }
        }
    }
    for c in PERSISTENCE_CATEGORIES {
        for (basis, suffix) in [("amount", ""), ("count", "_count")] {
            for period in ["monthly", "weekly"] {
                b.add(
                    format!("persistence_{period}_{}{suffix}", c.code()),
                    Temporal,
                    "index",
                    Unit,
                    format!("mean adjacent cosine of {period} interval {basis} vectors, {}", c.code()),
                );
            }
        }
    }
    for class in ["all", "fixed", "flexible"] {
        b.add(format!("burstiness_{class}"), Temporal, "index", Burstiness, format!("(r-1)/(r+1) of day gaps between {class} debits"));
    }
    for series in ["balance", "income", "salary", "fixed", "flexible"] {
        b.add(format!("volatility_{series}"), Temporal, "index", Volatility, format!("sqrt(cv^2/(1+cv^2)) of monthly {series}"));
    }

    b.add("dm_insolvency_spend", Distress, PM, NonNegative, "debt management and insolvency debits / months");
    b.add("od_days_per_month", Distress, "days/month", NonNegative, "days with negative end-of-day balance / months");
    b.add("prop_months_in_od", Distress, "proportion", Unit, "months touched by a negative spell longer than one day / months");
    b.add("od_fees", Distress, PM, NonNegative, "overdraft fee debits / months");
    b.add("rdd_per_month", Distress, "count/month", NonNegative, "returned direct debits / months");
    b.add("bnpl_spend", Distress, PM, NonNegative, "buy-now-pay-later debits / months");

    b.add("balance_mean", Resilience, "pence", Signed, "average over months of mean end-of-day balance");
    b.add("balance_min", Resilience, "pence", Signed, "average over months of minimum end-of-day balance");
    b.add("balance_max", Resilience, "pence", Signed, "average over months of maximum end-of-day balance");
    b.add("disposable_income", Resilience, "pence/month", Signed, "(income excl. loans - fixed - groceries) / months");
    b.add("prop_months_shock_withstand", Resilience, "proportion", Unit, "months with median end-of-day balance >= shock threshold / months");

    b.add("insurance_flag", Planning, "flag", Unit, "any insurance debit");
    b.add("insurance_spend", Planning, PM, NonNegative, "insurance debits / months");
    b.add("pension_flag", Planning, "flag", Unit, "any pension contribution debit");
    b.add("pension_spend", Planning, PM, NonNegative, "pension contribution debits / months");
    b.add("savings_amount", Planning, PM, NonNegative, "savings and debit internal transfers / months");

    for bt in BenefitType::ALL {
        b.add(format!("benefit_{}_amount", bt.code()), Aid, PM, NonNegative, format!("{} benefit credits / months", bt.code()));
    }
    for bt in BenefitType::ALL {
        b.add(format!("benefit_{}_share", bt.code()), Aid, "share", Unit, format!("{} benefit credits / total income", bt.code()));
    }
    b.add("pension_income", Aid, PM, NonNegative, "pension credits / months");

    b.add("card_providers_traditional", Inclusion, "count", NonNegative, "distinct traditional card provider terms matched");
    b.add("card_providers_nontraditional", Inclusion, "count", NonNegative, "distinct non-traditional card provider terms matched");
    b.add("loan_providers_traditional", Inclusion, "count", NonNegative, "distinct traditional loan provider terms matched");
    b.add("loan_providers_nontraditional", Inclusion, "count", NonNegative, "distinct non-traditional loan provider terms matched");
    b.add("payday_flag", Inclusion, "flag", Unit, "any payday-lender reference");
    b.add("card_payments", Inclusion, PM, NonNegative, "credit card payment debits / months");
    b.add("loans_received", Inclusion, PM, NonNegative, "loan credits / months");
    b.add("loans_paid", Inclusion, PM, NonNegative, "loan repayment debits / months");
    b.0
}

struct Schema {
    defs: Vec<FeatureDef>,
    index: HashMap<String, usize>,
}

fn schema() -> &'static Schema {
    static SCHEMA: OnceLock<Schema> = OnceLock::new();
    SCHEMA.get_or_init(|| {
        let defs = build();
        let index = defs.iter().enumerate().map(|(i, d)| (d.name.clone(), i)).collect();
        Schema { defs, index }
    })
}

/// All feature definitions in column order.
pub fn feature_defs() -> &'static [FeatureDef] {
    &schema().defs
}

pub fn feature_names() -> impl Iterator<Item = &'static str> {
    feature_defs().iter().map(|d| d.name.as_str())
}

pub fn feature_index(name: &str) -> Option<usize> {
    schema().index.get(name).copied()
}

pub fn feature_count() -> usize {
    feature_defs().len()
}

/// Benefit-derived columns: the direct proxies of the protected flags.
pub fn benefit_feature_names() -> Vec<String> {
    feature_defs()
        .iter()
        .filter(|d| d.name.starts_with("benefit_"))
        .map(|d| d.name.clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique() {
        assert_eq!(schema().index.len(), feature_count());
    }

    #[test]
    fn lookup_matches_order() {
        for (i, name) in feature_names().enumerate() {
            assert_eq!(feature_index(name), Some(i));
        }
    }

    #[test]
    fn benefit_columns() {
        assert_eq!(benefit_feature_names().len(), 14);
    }
}
