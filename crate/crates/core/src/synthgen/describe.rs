//! Per-persona summary of a cohort: mean and SD of monthly amounts for
//! each feature family, in pounds.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use crate::error::{Error, Result};
use crate::history::AccountHistory;
use crate::taxonomy::{Category, FlowClass};

use super::GroundTruth;

pub const FAMILIES: [&str; 7] =
    ["salary", "income", "benefits", "spend_fixed", "spend_flexible", "gambling", "month_end_balance"];

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub persona: String,
    pub family: &'static str,
    pub accounts: usize,
    /// Number of account-months pooled into the statistics.
    pub observations: usize,
    pub mean_gbp: f64,
    pub sd_gbp: f64,
}

/// Monthly family totals in pence for one account, one row per month.
fn monthly_families(h: &AccountHistory) -> Vec<[i64; 7]> {
    let mut rows = vec![[0i64; 7]; h.span_months()];
    for tx in &h.transactions {
        let m = h.month_index(tx.date);
        let class = tx.category.flow_class();
        let row = &mut rows[m];
        if tx.amount > 0 && tx.category == Category::Earnings {
            row[0] += tx.amount;
        }
        if tx.amount > 0 && class == FlowClass::Inflow {
            row[1] += tx.amount;
        }
        if tx.amount > 0 && tx.category.benefit_type().is_some() {
            row[2] += tx.amount;
        }
        if tx.amount < 0 && class == FlowClass::Fixed {
            row[3] -= tx.amount;
        }
        if tx.amount < 0 && class == FlowClass::Flexible {
            row[4] -= tx.amount;
        }
        if tx.amount < 0 && tx.category == Category::Gambling {
            row[5] -= tx.amount;
        }
        row[6] = tx.balance_after;
    }
    // months without transactions keep the previous month-end balance
    for m in 1..rows.len() {
        if !h.transactions.iter().any(|t| h.month_index(t.date) == m) {
            rows[m][6] = rows[m - 1][6];
        }
    }
    rows
}

/// One row per persona and family, personas in name order. Statistics
/// pool every account-month of the persona; the SD is the population SD.
pub fn describe_cohort(histories: &[AccountHistory], truth: &[GroundTruth]) -> Result<Vec<SummaryRow>> {
    if histories.is_empty() {
        return Err(Error::EmptyInput);
    }
    let persona_of: HashMap<&str, &str> = truth.iter().map(|t| (t.account_id.as_str(), t.persona.as_str())).collect();
    let mut pooled: BTreeMap<&str, (usize, Vec<Vec<f64>>)> = BTreeMap::new();
    for h in histories {
        let persona = persona_of
            .get(h.account_id.as_str())
            .ok_or_else(|| Error::Invalid(format!("no ground truth for account '{}'", h.account_id)))?;
        let entry = pooled.entry(persona).or_insert_with(|| (0, vec![Vec::new(); FAMILIES.len()]));
        entry.0 += 1;
        for row in monthly_families(h) {
            for (f, v) in row.iter().enumerate() {
                entry.1[f].push(*v as f64 / 100.0);
            }
        }
    }
    let mut out = Vec::new();
    for (persona, (accounts, values)) in pooled {
        for (f, family) in FAMILIES.iter().enumerate() {
            let v = &values[f];
            let n = v.len() as f64;
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            out.push(SummaryRow {
                persona: persona.to_string(),
                family,
                accounts,
                observations: v.len(),
                mean_gbp: mean,
                sd_gbp: var.sqrt(),
            });
        }
    }
    Ok(out)
}

pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["persona", "family", "accounts", "observations", "mean_gbp", "sd_gbp"])?;
    for r in rows {
        wtr.write_record([
            r.persona.as_str(),
            r.family,
            &r.accounts.to_string(),
            &r.observations.to_string(),
            &format!("{:.2}", r.mean_gbp),
            &format!("{:.2}", r.sd_gbp),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::Gender;
    use crate::ingest::Transaction;
    use crate::rules::KeywordRuleSet;
    use chrono::NaiveDate;

    fn truth(id: &str, persona: &str) -> GroundTruth {
        GroundTruth {
            account_id: id.into(),
            persona: persona.into(),
            gender: Gender::Female,
            age: 30,
            disability: false,
            carer: false,
            has_child: false,
            control: false,
        }
    }

    fn salaried(id: &str, pence: i64) -> AccountHistory {
        let mut balance = 0;
        let txs = (1..=6)
            .map(|m| {
                balance += pence;
                Transaction {
                    account_id: id.into(),
                    date: NaiveDate::from_ymd_opt(2021, m, 25).unwrap(),
                    amount: pence,
                    description: "ACME SALARY".into(),
                    category: Category::Earnings,
                    balance_after: balance,
                }
            })
            .collect();
        AccountHistory::new(id, txs, &KeywordRuleSet::builtin())
    }

    #[test]
    fn fixed_salary_has_zero_sd() {
        let rows = describe_cohort(&[salaried("A", 100_000)], &[truth("A", "credit_user")]).unwrap();
        let salary = rows.iter().find(|r| r.family == "salary").unwrap();
        assert_eq!(salary.mean_gbp, 1000.0);
        assert_eq!(salary.sd_gbp, 0.0);
    }

    #[test]
    fn rows_ordered_by_persona() {
        let hs = [salaried("A", 300_000), salaried("B", 100_000)];
        let ts = [truth("A", "young_challenged"), truth("B", "beneficiary")];
        let rows = describe_cohort(&hs, &ts).unwrap();
        assert_eq!(rows.len(), 2 * FAMILIES.len());
        assert_eq!(rows[0].persona, "beneficiary");
        assert_eq!(rows[FAMILIES.len()].persona, "young_challenged");
    }

    #[test]
    fn empty_cohort_is_an_error() {
        assert!(describe_cohort(&[], &[]).is_err());
    }
}
