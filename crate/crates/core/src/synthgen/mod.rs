//! Reproducible synthetic account cohorts.
//!
//! Five behavioural personas drive salary, spending, credit use and
//! distress. Gender, children, disability and caring are drawn
//! independently of persona; the planted proxy strength controls how
//! strongly the last three shape benefit receipt and related spending.
//! A `control` attribute is drawn from its own stream and influences
//! nothing.

mod account;
mod describe;
mod persona;

use std::io::{Read, Write};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::{AccountHistory, Demographics, Gender};
use crate::ingest::{Transaction, MIN_MONTHS};
use crate::rules::KeywordRuleSet;

pub use describe::{describe_cohort, write_summary_csv, SummaryRow, FAMILIES};
pub use persona::{
    AgeSpec, AttributeSpec, BalanceSpec, BenefitSpec, Cadence, CreditSpec, DistressSpec, EffectSpec, GamblingSpec,
    OtherIncomeSpec, PersonaSet, PersonaSpec, PlanningSpec, SalarySpec, SpendRate, PERSONA_NAMES,
};

/// First month of the earlier end-of-history window. Four in five
/// accounts end in the quarter starting here, the rest in the next one.
pub const FIRST_END_MONTH: NaiveDate = match NaiveDate::from_ymd_opt(2021, 7, 1) {
    Some(d) => d,
    None => panic!("valid date"),
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortConfig {
    pub n_accounts: usize,
    pub months_per_account: u32,
    pub seed: u64,
    pub planted_proxy_strength: f64,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig { n_accounts: 2000, months_per_account: 12, seed: 7, planted_proxy_strength: 0.8 }
    }
}

impl CohortConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_accounts < 1 {
            return Err(Error::Config("n_accounts must be at least 1".into()));
        }
        if self.months_per_account < MIN_MONTHS {
            return Err(Error::Config(format!("months_per_account must be at least {MIN_MONTHS}")));
        }
        if !(0.0..=1.0).contains(&self.planted_proxy_strength) {
            return Err(Error::Config("planted_proxy_strength must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// What the generator knows about each account.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub account_id: String,
    pub persona: String,
    pub gender: Gender,
    pub age: u32,
    pub disability: bool,
    pub carer: bool,
    pub has_child: bool,
    pub control: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cohort {
    /// Per account, date ordered.
    pub transactions: Vec<Vec<Transaction>>,
    pub truth: Vec<GroundTruth>,
}

impl Cohort {
    pub fn n_transactions(&self) -> usize {
        self.transactions.iter().map(Vec::len).sum()
    }

    pub fn demographics(&self) -> Vec<(String, Demographics)> {
        self.truth.iter().map(|t| (t.account_id.clone(), account::demographics_for(t))).collect()
    }

    /// Tagged histories with the applicant demographics attached.
    pub fn histories(&self, rules: &KeywordRuleSet) -> Vec<AccountHistory> {
        self.transactions
            .par_iter()
            .zip(&self.truth)
            .map(|(txs, truth)| {
                let mut h = AccountHistory::new(truth.account_id.clone(), txs.clone(), rules);
                h.demographics = Some(account::demographics_for(truth));
                h
            })
            .collect()
    }

    pub fn write_transactions<W: Write>(&self, writer: W) -> Result<()> {
        crate::ingest::write_transactions_csv(writer, self.transactions.iter().flatten())
    }

    pub fn write_demographics<W: Write>(&self, writer: W) -> Result<()> {
        let rows = self.demographics();
        crate::history::write_demographics(writer, rows.iter().map(|(id, d)| (id.as_str(), d)))
    }

    pub fn write_ground_truth<W: Write>(&self, writer: W) -> Result<()> {
        write_ground_truth_csv(writer, &self.truth)
    }
}

/// Generate a cohort. Accounts are generated in parallel, each from its
/// own random stream, so the output does not depend on the worker count.
pub fn generate_cohort(cfg: &CohortConfig, personas: &PersonaSet) -> Result<Cohort> {
    cfg.validate()?;
    personas.validate()?;
    let (transactions, truth) = (0..cfg.n_accounts)
        .into_par_iter()
        .map(|i| account::generate_account(i, cfg, personas))
        .unzip();
    Ok(Cohort { transactions, truth })
}

pub const GROUND_TRUTH_HEADER: [&str; 8] =
    ["account_id", "persona", "gender", "age", "disability", "carer", "has_child", "control"];

fn bit(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn write_ground_truth_csv<W: Write>(writer: W, rows: &[GroundTruth]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(GROUND_TRUTH_HEADER)?;
    for t in rows {
        wtr.write_record([
            t.account_id.as_str(),
            &t.persona,
            t.gender.as_str(),
            &t.age.to_string(),
            bit(t.disability),
            bit(t.carer),
            bit(t.has_child),
            bit(t.control),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_ground_truth_csv<R: Read>(reader: R) -> Result<Vec<GroundTruth>> {
    let mut rdr = csv::Reader::from_reader(reader);
    if rdr.headers()?.iter().ne(GROUND_TRUTH_HEADER) {
        return Err(Error::Header("unexpected ground-truth header".into()));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let age = rec[3].parse().map_err(|_| Error::Invalid(format!("bad age '{}'", &rec[3])))?;
        out.push(GroundTruth {
            account_id: rec[0].to_string(),
            persona: rec[1].to_string(),
            gender: Gender::parse(&rec[2]),
            age,
            disability: &rec[4] == "1",
            carer: &rec[5] == "1",
            has_child: &rec[6] == "1",
            control: &rec[7] == "1",
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::account::linked_probability;
    use crate::ingest::{check_eligibility, filter_eligible};

    fn small(seed: u64) -> CohortConfig {
        CohortConfig { n_accounts: 60, months_per_account: 8, seed, planted_proxy_strength: 0.8 }
    }

    #[test]
    fn same_seed_same_cohort() {
        let set = PersonaSet::builtin();
        let a = generate_cohort(&small(7), &set).unwrap();
        let b = generate_cohort(&small(7), &set).unwrap();
        assert_eq!(a, b);
        let c = generate_cohort(&small(8), &set).unwrap();
        assert_ne!(a.transactions, c.transactions);
    }

    #[test]
    fn running_balance_identity_and_eligibility() {
        let cohort = generate_cohort(&small(3), &PersonaSet::builtin()).unwrap();
        for txs in &cohort.transactions {
            for w in txs.windows(2) {
                assert_eq!(w[1].balance_after, w[0].balance_after + w[1].amount);
                assert!(w[0].date <= w[1].date);
            }
        }
        let histories = cohort.histories(&KeywordRuleSet::builtin());
        for h in &histories {
            let rec = check_eligibility(h);
            assert!(rec.eligible, "{rec:?}");
            assert_eq!(h.span_months(), 8);
        }
        let (kept, _) = filter_eligible(histories);
        assert_eq!(kept.len(), 60);
    }

    #[test]
    fn invalid_config_rejected() {
        let set = PersonaSet::builtin();
        let mut cfg = small(1);
        cfg.months_per_account = 5;
        assert!(generate_cohort(&cfg, &set).is_err());
        cfg = small(1);
        cfg.n_accounts = 0;
        assert!(generate_cohort(&cfg, &set).is_err());
        cfg = small(1);
        cfg.planted_proxy_strength = 1.5;
        assert!(generate_cohort(&cfg, &set).is_err());
    }

    #[test]
    fn later_window_is_one_in_five() {
        let cohort = generate_cohort(&small(5), &PersonaSet::builtin()).unwrap();
        let first = crate::history::quarter_key(FIRST_END_MONTH);
        let later = cohort
            .transactions
            .iter()
            .filter(|txs| crate::history::quarter_key(txs.last().unwrap().date) == first + 1)
            .count();
        assert_eq!(later, 12);
    }

    #[test]
    fn ground_truth_round_trip() {
        let cohort = generate_cohort(&small(2), &PersonaSet::builtin()).unwrap();
        let mut buf = Vec::new();
        cohort.write_ground_truth(&mut buf).unwrap();
        assert_eq!(read_ground_truth_csv(&buf[..]).unwrap(), cohort.truth);
    }

    #[test]
    fn linked_probability_endpoints() {
        assert_eq!(linked_probability(0.3, true, 0.0), 0.3);
        assert_eq!(linked_probability(0.3, false, 0.0), 0.3);
        assert_eq!(linked_probability(0.3, true, 1.0), 1.0);
        assert_eq!(linked_probability(0.3, false, 1.0), 0.0);
    }
}
