//! Engineered financial-behaviour features.
//!
//! Every amount-based feature is a monthly average over the account's
//! calendar-month window unless its definition says otherwise. Missing
//! values are kept as `None`; imputation belongs to the model code.

mod extract;
pub mod formulas;
pub mod io;
pub mod salary;
pub mod schema;

use rayon::prelude::*;

pub use extract::{
    balance_profile, benefit_type_of, build_feature_vector, disposable_income, distress_metrics, is_gambling,
    monthly_totals, BalanceProfile, DistressMetrics, FeatureConfig, FeatureVector, MonthlyTotals,
    SHOCK_THRESHOLD_PENCE,
};
pub use formulas::{burstiness, persistence, volatility, SeriesStats};
pub use io::Table;
pub use salary::{salary_consistency, SalaryConsistency};
pub use schema::{feature_count, feature_defs, feature_index, feature_names, FeatureDef, FeatureGroup, Range};

use crate::history::AccountHistory;
use crate::rules::KeywordRuleSet;

/// Feature vectors for many accounts, in input order. Accounts are
/// independent, so the work is spread over the rayon pool.
pub fn extract_all(histories: &[AccountHistory], rules: &KeywordRuleSet, cfg: &FeatureConfig) -> Vec<FeatureVector> {
    histories.par_iter().map(|h| build_feature_vector(h, rules, cfg)).collect()
}
