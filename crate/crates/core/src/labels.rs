//! Financial-vulnerability indicator labels and protected-attribute
//! profiles.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{balance_profile, benefit_type_of, FeatureVector};
use crate::history::{AccountHistory, Demographics, Gender};
use crate::taxonomy::{BenefitType, Category};

/// Label thresholds. Defaults: a £100 shock, £100 of disposable income,
/// £100 of monthly gambling, more than half of the months, one returned
/// direct debit per month.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelThresholds {
    pub shock_pence: i64,
    pub disposable_pence: i64,
    pub gambling_pence: i64,
    pub month_share: f64,
    pub rdd_per_month: f64,
}

impl Default for LabelThresholds {
    fn default() -> Self {
        LabelThresholds {
            shock_pence: 10_000,
            disposable_pence: 10_000,
            gambling_pence: 10_000,
            month_share: 0.5,
            rdd_per_month: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ShockLabels {
    pub unable: bool,
    pub never: bool,
    pub always: bool,
}

/// Shock labels from per-month medians of the end-of-day balance.
pub fn shock_from_medians(medians: &[f64], th: &LabelThresholds) -> ShockLabels {
    let months = medians.len();
    let withstand = medians.iter().filter(|&&m| m >= th.shock_pence as f64).count();
    let fail = months - withstand;
    ShockLabels {
        unable: months > 0 && fail as f64 / months as f64 > th.month_share,
        never: months > 0 && withstand == 0,
        always: months > 0 && withstand == months,
    }
}

pub fn label_shock(history: &AccountHistory, th: &LabelThresholds) -> ShockLabels {
    shock_from_medians(&balance_profile(history).median, th)
}

/// At least one debt-management or insolvency debit.
pub fn label_insolvent(history: &AccountHistory) -> bool {
    history
        .transactions
        .iter()
        .any(|t| t.category == Category::DebtManagementInsolvency && t.amount < 0)
}

pub fn label_disposable(disposable_income: Option<f64>, th: &LabelThresholds) -> Option<bool> {
    disposable_income.map(|d| d <= th.disposable_pence as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OverdraftLabels {
    pub overdraft: bool,
    pub never: bool,
    pub always: bool,
}

/// Overdraft labels from the per-month overdraft verdicts.
pub fn overdraft_from_months(in_od: &[bool], th: &LabelThresholds) -> OverdraftLabels {
    let months = in_od.len();
    let od = in_od.iter().filter(|&&b| b).count();
    OverdraftLabels {
        overdraft: months > 0 && od as f64 / months as f64 > th.month_share,
        never: months > 0 && od == 0,
        always: months > 0 && od == months,
    }
}

/// A month counts as in overdraft when a negative end-of-day balance spell
/// lasting more than one day touches it.
pub fn label_overdraft(history: &AccountHistory, th: &LabelThresholds) -> OverdraftLabels {
    overdraft_from_months(&balance_profile(history).in_od, th)
}

pub fn label_rdd(rdd_per_month: Option<f64>, th: &LabelThresholds) -> Option<bool> {
    rdd_per_month.map(|r| r >= th.rdd_per_month)
}

pub fn label_gambler(gambling_out: Option<f64>, th: &LabelThresholds) -> Option<bool> {
    gambling_out.map(|g| g >= th.gambling_pence as f64)
}

/// The ten indicator variants for one account.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FviLabelSet {
    pub shock_unable: Option<bool>,
    pub shock_never_withstand: Option<bool>,
    pub shock_always_withstand: Option<bool>,
    pub insolvent: Option<bool>,
    pub insufficient_disposable_income: Option<bool>,
    pub overdraft: Option<bool>,
    pub overdraft_never: Option<bool>,
    pub overdraft_always: Option<bool>,
    pub returned_dd: Option<bool>,
    pub gambler: Option<bool>,
}

impl FviLabelSet {
    pub const NAMES: [&'static str; 10] = [
        "shock_unable",
        "shock_never_withstand",
        "shock_always_withstand",
        "insolvent",
        "insufficient_disposable_income",
        "overdraft",
        "overdraft_never",
        "overdraft_always",
        "returned_dd",
        "gambler",
    ];

    pub fn to_array(&self) -> [Option<bool>; 10] {
        [
            self.shock_unable,
            self.shock_never_withstand,
            self.shock_always_withstand,
            self.insolvent,
            self.insufficient_disposable_income,
            self.overdraft,
            self.overdraft_never,
            self.overdraft_always,
            self.returned_dd,
            self.gambler,
        ]
    }

    /// Feature columns a label is computed from. Models for that label
    /// are trained without them.
    pub fn defining_features(name: &str) -> &'static [&'static str] {
        match name {
            "shock_unable" | "shock_never_withstand" | "shock_always_withstand" => &["prop_months_shock_withstand"],
            "insolvent" => &["dm_insolvency_spend"],
            "insufficient_disposable_income" => &["disposable_income"],
            "overdraft" | "overdraft_never" | "overdraft_always" => &["prop_months_in_od", "od_days_per_month"],
            "returned_dd" => &["rdd_per_month"],
            "gambler" => &["gambling_out"],
            _ => &[],
        }
    }

    /// Never/always variants must be consistent with the headline label.
    pub fn implications_hold(&self) -> bool {
        let implies = |a: Option<bool>, b: Option<bool>| !matches!((a, b), (Some(true), Some(false)));
        let not = |x: Option<bool>| x.map(|v| !v);
        implies(self.shock_never_withstand, self.shock_unable)
            && implies(self.shock_always_withstand, not(self.shock_unable))
            && implies(self.overdraft_always, self.overdraft)
            && implies(self.overdraft_never, not(self.overdraft))
    }
}

/// Label one account from its history and feature vector.
pub fn label_account(history: &AccountHistory, features: &FeatureVector, th: &LabelThresholds) -> FviLabelSet {
    let bp = balance_profile(history);
    let shock = shock_from_medians(&bp.median, th);
    let od = overdraft_from_months(&bp.in_od, th);
    FviLabelSet {
        shock_unable: Some(shock.unable),
        shock_never_withstand: Some(shock.never),
        shock_always_withstand: Some(shock.always),
        insolvent: Some(label_insolvent(history)),
        insufficient_disposable_income: label_disposable(features.get("disposable_income"), th),
        overdraft: Some(od.overdraft),
        overdraft_never: Some(od.never),
        overdraft_always: Some(od.always),
        returned_dd: label_rdd(features.get("rdd_per_month"), th),
        gambler: label_gambler(features.get("gambling_out"), th),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Given,
    Proxy,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Given => "given",
            Source::Proxy => "proxy",
        }
    }
}

pub fn age_band(age: u32) -> &'static str {
    match age {
        0..=24 => "18-24",
        25..=34 => "25-34",
        35..=44 => "35-44",
        45..=54 => "45-54",
        55..=64 => "55-64",
        _ => "65+",
    }
}

/// Protected and sensitive attributes of one applicant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProtectedProfile {
    pub account_id: String,
    pub gender: Gender,
    pub age: Option<u32>,
    pub disability: bool,
    pub carer: bool,
    pub has_child: bool,
    pub gender_source: Option<Source>,
    pub age_source: Option<Source>,
    pub flag_source: Source,
}

impl ProtectedProfile {
    pub fn age_band(&self) -> Option<&'static str> {
        self.age.map(age_band)
    }

    /// Binary encodings used as model targets and correlation columns.
    pub fn binary_attributes(&self) -> [(&'static str, Option<bool>); 4] {
        let female = match self.gender {
            Gender::Unknown => None,
            g => Some(g == Gender::Female),
        };
        [
            ("female", female),
            ("disability", Some(self.disability)),
            ("carer", Some(self.carer)),
            ("has_child", Some(self.has_child)),
        ]
    }
}

/// Benefit subtypes that mark each proxy flag.
pub const DISABILITY_BENEFITS: [BenefitType; 1] = [BenefitType::Disability];
pub const CARER_BENEFITS: [BenefitType; 1] = [BenefitType::Carer];
pub const CHILD_BENEFITS: [BenefitType; 2] = [BenefitType::Child, BenefitType::ChildTaxCredit];

/// Gender and age come from the applicant's own data; disability, carer
/// and child flags are proxies set by at least one matching benefit credit.
pub fn derive_protected(history: &AccountHistory, given: Option<&Demographics>) -> ProtectedProfile {
    let received: BTreeSet<BenefitType> = history
        .transactions
        .iter()
        .zip(&history.tags)
        .filter_map(|(t, tags)| benefit_type_of(t.category, t.amount, *tags))
        .collect();
    let any = |set: &[BenefitType]| set.iter().any(|b| received.contains(b));
    let given = given.or(history.demographics.as_ref());
    ProtectedProfile {
        account_id: history.account_id.clone(),
        gender: given.map(|d| d.gender).unwrap_or_default(),
        age: given.and_then(|d| d.age),
        disability: any(&DISABILITY_BENEFITS),
        carer: any(&CARER_BENEFITS),
        has_child: any(&CHILD_BENEFITS),
        gender_source: given.filter(|d| d.gender != Gender::Unknown).map(|_| Source::Given),
        age_source: given.and_then(|d| d.age).map(|_| Source::Given),
        flag_source: Source::Proxy,
    }
}

fn cell(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "1",
        Some(false) => "0",
        None => "",
    }
}

pub fn write_labels_csv<W: Write>(writer: W, rows: &[(String, FviLabelSet)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["account_id"];
    header.extend(FviLabelSet::NAMES);
    wtr.write_record(&header)?;
    for (id, labels) in rows {
        let mut rec = vec![id.as_str()];
        rec.extend(labels.to_array().iter().map(|v| cell(*v)));
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_labels_csv<R: Read>(reader: R) -> Result<Vec<(String, FviLabelSet)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() != 11 || header[0] != "account_id" || header[1..] != FviLabelSet::NAMES {
        return Err(Error::Header("unexpected labels header".into()));
    }
    let parse = |s: &str| -> Result<Option<bool>> {
        match s {
            "1" => Ok(Some(true)),
            "0" => Ok(Some(false)),
            "" => Ok(None),
            other => Err(Error::Invalid(format!("bad label '{other}'"))),
        }
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let v: Vec<Option<bool>> = (1..11).map(|i| parse(&rec[i])).collect::<Result<_>>()?;
        out.push((
            rec[0].to_string(),
            FviLabelSet {
                shock_unable: v[0],
                shock_never_withstand: v[1],
                shock_always_withstand: v[2],
                insolvent: v[3],
                insufficient_disposable_income: v[4],
                overdraft: v[5],
                overdraft_never: v[6],
                overdraft_always: v[7],
                returned_dd: v[8],
                gambler: v[9],
            },
        ));
    }
    Ok(out)
}

pub const PROTECTED_HEADER: [&str; 10] = [
    "account_id",
    "gender",
    "age",
    "disability",
    "carer",
    "has_child",
    "gender_source",
    "age_source",
    "flag_source",
    "age_band",
];

pub fn write_protected_csv<W: Write>(writer: W, rows: &[ProtectedProfile]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(PROTECTED_HEADER)?;
    for p in rows {
        wtr.write_record([
            p.account_id.as_str(),
            p.gender.as_str(),
            &p.age.map(|a| a.to_string()).unwrap_or_default(),
            cell(Some(p.disability)),
            cell(Some(p.carer)),
            cell(Some(p.has_child)),
            p.gender_source.map(Source::as_str).unwrap_or(""),
            p.age_source.map(Source::as_str).unwrap_or(""),
            p.flag_source.as_str(),
            p.age_band().unwrap_or(""),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_protected_csv<R: Read>(reader: R) -> Result<Vec<ProtectedProfile>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != PROTECTED_HEADER {
        return Err(Error::Header("unexpected protected-attribute header".into()));
    }
    let source = |s: &str| match s {
        "given" => Some(Source::Given),
        "proxy" => Some(Source::Proxy),
        _ => None,
    };
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let age = if rec[2].is_empty() {
            None
        } else {
            Some(rec[2].parse().map_err(|_| Error::Invalid(format!("bad age '{}'", &rec[2])))?)
        };
        out.push(ProtectedProfile {
            account_id: rec[0].to_string(),
            gender: Gender::parse(&rec[1]),
            age,
            disability: &rec[3] == "1",
            carer: &rec[4] == "1",
            has_child: &rec[5] == "1",
            gender_source: source(&rec[6]),
            age_source: source(&rec[7]),
            flag_source: source(&rec[8]).unwrap_or(Source::Proxy),
        });
    }
    Ok(out)
}
