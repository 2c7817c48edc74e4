//! Per-account transaction histories and the calendar helpers the feature
//! and label code share.

use std::collections::HashMap;
use std::io::{Read, Write};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{group_by_account, Transaction};
use crate::rules::{KeywordRuleSet, Tags};

/// Months since year 0; consecutive calendar months differ by one.
pub fn month_key(date: NaiveDate) -> i32 {
    date.year() * 12 + date.month0() as i32
}

/// First day of the month with the given key.
pub fn month_start(key: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(key.div_euclid(12), key.rem_euclid(12) as u32 + 1, 1)
        .expect("valid month key")
}

/// Three-month window index used as the out-of-time key.
pub fn quarter_key(date: NaiveDate) -> i32 {
    month_key(date).div_euclid(3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    #[default]
    Unknown,
}

impl Gender {
    pub fn parse(s: &str) -> Gender {
        match s.trim().to_ascii_lowercase().as_str() {
            "female" | "f" => Gender::Female,
            "male" | "m" => Gender::Male,
            _ => Gender::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Unknown => "unknown",
        }
    }
}

/// Profile data supplied by the applicant rather than derived from
/// transactions.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Demographics {
    pub gender: Gender,
    pub age: Option<u32>,
    pub residential_status: Option<String>,
    pub employment_length_months: Option<u32>,
}

pub const DEMOGRAPHICS_HEADER: [&str; 5] =
    ["account_id", "gender", "age", "residential_status", "employment_length_months"];

pub fn read_demographics<R: Read>(reader: R) -> Result<HashMap<String, Demographics>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if names != DEMOGRAPHICS_HEADER {
        return Err(Error::Header(format!("expected {}", DEMOGRAPHICS_HEADER.join(","))));
    }
    let mut out = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let opt = |s: &str| (!s.trim().is_empty()).then(|| s.trim().to_string());
        let num = |s: &str, what: &str| -> Result<Option<u32>> {
            opt(s)
                .map(|v| v.parse::<u32>().map_err(|_| Error::Invalid(format!("bad {what} '{v}'"))))
                .transpose()
        };
        out.insert(
            rec[0].trim().to_string(),
            Demographics {
                gender: Gender::parse(&rec[1]),
                age: num(&rec[2], "age")?,
                residential_status: opt(&rec[3]),
                employment_length_months: num(&rec[4], "employment length")?,
            },
        );
    }
    Ok(out)
}

pub fn write_demographics<'a, W, I>(writer: W, rows: I) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, &'a Demographics)>,
{
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(DEMOGRAPHICS_HEADER)?;
    for (id, d) in rows {
        wtr.write_record([
            id,
            d.gender.as_str(),
            &d.age.map(|a| a.to_string()).unwrap_or_default(),
            d.residential_status.as_deref().unwrap_or(""),
            &d.employment_length_months.map(|a| a.to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Date-ordered transactions of one account with their keyword tags.
#[derive(Debug, Clone, PartialEq)]
pub struct AccountHistory {
    pub account_id: String,
    pub transactions: Vec<Transaction>,
    /// Keyword tags, parallel to `transactions`.
    pub tags: Vec<Tags>,
    pub demographics: Option<Demographics>,
}

impl AccountHistory {
    /// Sort (stable, by date) and tag the transactions of one account.
    pub fn new(account_id: impl Into<String>, mut transactions: Vec<Transaction>, rules: &KeywordRuleSet) -> Self {
        transactions.sort_by_key(|t| t.date);
        let tags = transactions.iter().map(|t| rules.classify(&t.description)).collect();
        AccountHistory { account_id: account_id.into(), transactions, tags, demographics: None }
    }

    /// Group a flat transaction list into tagged histories.
    pub fn from_transactions(transactions: Vec<Transaction>, rules: &KeywordRuleSet) -> Vec<AccountHistory> {
        group_by_account(transactions)
            .into_iter()
            .map(|txs| {
                let id = txs[0].account_id.clone();
                AccountHistory::new(id, txs, rules)
            })
            .collect()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.transactions.first().map(|t| t.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.transactions.last().map(|t| t.date)
    }

    pub fn first_month(&self) -> i32 {
        self.first_date().map(month_key).unwrap_or(0)
    }

    /// Inclusive count of calendar months from first to last transaction.
    pub fn span_months(&self) -> usize {
        match (self.first_date(), self.last_date()) {
            (Some(a), Some(b)) => (month_key(b) - month_key(a) + 1) as usize,
            _ => 0,
        }
    }

    /// Number of distinct calendar months holding a transaction.
    pub fn distinct_months(&self) -> usize {
        let mut keys: Vec<i32> = self.transactions.iter().map(|t| month_key(t.date)).collect();
        keys.dedup();
        keys.len()
    }

    /// Month offset (0-based) of a date relative to the first month.
    pub fn month_index(&self, date: NaiveDate) -> usize {
        (month_key(date) - self.first_month()) as usize
    }

    /// End-of-day balance for every day from the first to the last
    /// transaction. A day without transactions keeps the previous balance.
    pub fn daily_balances(&self) -> Vec<(NaiveDate, i64)> {
        let (Some(first), Some(last)) = (self.first_date(), self.last_date()) else {
            return Vec::new();
        };
        let days = (last - first).num_days() as usize + 1;
        let mut out = Vec::with_capacity(days);
        let mut idx = 0;
        let mut balance = 0;
        for (day, date) in first.iter_days().take(days).enumerate() {
            debug_assert_eq!(day, out.len());
            while idx < self.transactions.len() && self.transactions[idx].date == date {
                balance = self.transactions[idx].balance_after;
                idx += 1;
            }
            out.push((date, balance));
        }
        out
    }

    /// Time key of the three-month window the observation ends in.
    pub fn time_key(&self) -> i32 {
        self.last_date().map(quarter_key).unwrap_or(0)
    }
}
