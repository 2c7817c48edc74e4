//! Persona parameter sets for the synthetic cohort generator.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{Category, FlowClass};

pub const PERSONA_NAMES: [&str; 5] =
    ["beneficiary", "credit_user", "financially_resilient", "financially_secure", "young_challenged"];

const BUILTIN: &str = include_str!("../../data/personas.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cadence {
    Monthly,
    FourWeekly,
    Weekly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgeSpec {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SalarySpec {
    pub probability: f64,
    /// Mean pay per payment.
    pub amount_gbp: f64,
    /// Between-account coefficient of variation.
    pub cv: f64,
    /// Within-account payment-to-payment coefficient of variation.
    pub jitter: f64,
    pub cadence: Cadence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BalanceSpec {
    pub target_gbp: f64,
    pub target_sd_gbp: f64,
    pub monthly_sd_gbp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpendRate {
    /// Mean transactions per month, or the mean number of bills for a
    /// recurring category.
    pub count: f64,
    pub amount_gbp: f64,
    /// Defaults to true for fixed categories.
    #[serde(default)]
    pub recurring: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GamblingSpec {
    pub probability: f64,
    pub bets_per_month: f64,
    pub stake_gbp: f64,
    pub win_probability: f64,
    pub lottery_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistressSpec {
    pub rdd_probability: f64,
    pub rdd_per_month: f64,
    pub debt_management_probability: f64,
    pub debt_management_gbp: f64,
    pub bnpl_probability: f64,
    pub bnpl_per_month: f64,
    pub bnpl_gbp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreditSpec {
    pub traditional_cards: f64,
    pub nontraditional_cards: f64,
    pub card_payment_gbp: f64,
    pub traditional_loans: f64,
    pub nontraditional_loans: f64,
    pub loan_payment_gbp: f64,
    pub payday_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanningSpec {
    pub insurance_probability: f64,
    pub insurance_gbp: f64,
    pub pension_probability: f64,
    pub pension_gbp: f64,
    pub savings_probability: f64,
    pub savings_gbp: f64,
    pub pension_income_probability: f64,
    pub pension_income_gbp: f64,
}

/// Base receipt probabilities per benefit. Child, child tax credit, carer
/// and disability receipt is moved towards the matching attribute by the
/// planted proxy strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenefitSpec {
    pub child: f64,
    pub child_tax_credit: f64,
    pub carer: f64,
    pub disability: f64,
    pub universal_credit: f64,
    pub working_tax_credit: f64,
    pub employment_support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtherIncomeSpec {
    pub transfers_per_month: f64,
    pub transfer_gbp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaSpec {
    pub name: String,
    pub mix_weight: f64,
    pub age: AgeSpec,
    pub salary: SalarySpec,
    pub balance: BalanceSpec,
    pub gambling: GamblingSpec,
    pub distress: DistressSpec,
    pub credit: CreditSpec,
    pub planning: PlanningSpec,
    pub benefits: BenefitSpec,
    pub other_income: OtherIncomeSpec,
    /// Keyed by category code.
    pub spend: BTreeMap<String, SpendRate>,
}

/// Attribute marginals shared by every persona, so that attributes are
/// independent of persona membership.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSpec {
    pub female_probability: f64,
    pub child_probability_female: f64,
    pub child_probability_male: f64,
    pub disability_probability: f64,
    pub carer_probability: f64,
    pub control_probability: f64,
}

/// Behavioural effects of the attributes. Multipliers marked "per unit
/// strength" are scaled by the planted proxy strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectSpec {
    /// Extra child and school spend per unit strength for parents.
    pub child_spend_per_strength: f64,
    /// Child and school bill probability for accounts without children.
    pub childless_school_probability: f64,
    pub child_school_gbp: f64,
    /// Extra medical spend per unit strength for disabled applicants.
    pub disability_medical_per_strength: f64,
    pub female_fashion_multiplier: f64,
    pub female_gambling_multiplier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersonaSet {
    pub attributes: AttributeSpec,
    pub effects: EffectSpec,
    pub persona: Vec<PersonaSpec>,
}

fn probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be a probability, got {p}")))
    }
}

fn non_negative(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be non-negative, got {v}")))
    }
}

impl PersonaSet {
    pub fn builtin() -> PersonaSet {
        PersonaSet::parse(BUILTIN).expect("builtin personas are valid")
    }

    pub fn parse(text: &str) -> Result<PersonaSet> {
        let set: PersonaSet = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<PersonaSet> {
        PersonaSet::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("persona set serialises")
    }

    pub fn get(&self, name: &str) -> Option<&PersonaSpec> {
        self.persona.iter().find(|p| p.name == name)
    }

    /// Replace the mixture weights; personas not named get weight zero.
    pub fn with_weights(mut self, weights: &[(&str, f64)]) -> Result<PersonaSet> {
        for p in &mut self.persona {
            p.mix_weight = weights.iter().find(|(n, _)| *n == p.name).map_or(0.0, |(_, w)| *w);
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.persona.is_empty() {
            return Err(Error::Config("no personas defined".into()));
        }
        let a = &self.attributes;
        for (n, p) in [
            ("female_probability", a.female_probability),
            ("child_probability_female", a.child_probability_female),
            ("child_probability_male", a.child_probability_male),
            ("disability_probability", a.disability_probability),
            ("carer_probability", a.carer_probability),
            ("control_probability", a.control_probability),
            ("childless_school_probability", self.effects.childless_school_probability),
        ] {
            probability(n, p)?;
        }
        let e = &self.effects;
        for (n, v) in [
            ("child_spend_per_strength", e.child_spend_per_strength),
            ("child_school_gbp", e.child_school_gbp),
            ("disability_medical_per_strength", e.disability_medical_per_strength),
            ("female_fashion_multiplier", e.female_fashion_multiplier),
            ("female_gambling_multiplier", e.female_gambling_multiplier),
        ] {
            non_negative(n, v)?;
        }
        let mut seen = Vec::new();
        for p in &self.persona {
            if !PERSONA_NAMES.contains(&p.name.as_str()) {
                return Err(Error::Config(format!("unknown persona '{}'", p.name)));
            }
            if seen.contains(&p.name) {
                return Err(Error::Config(format!("persona '{}' defined twice", p.name)));
            }
            seen.push(p.name.clone());
            p.validate()?;
        }
        let total: f64 = self.persona.iter().map(|p| p.mix_weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("persona mix weights sum to {total}, expected 1")));
        }
        Ok(())
    }
}

impl PersonaSpec {
    fn validate(&self) -> Result<()> {
        let n = &self.name;
        let probabilities = [
            ("mix_weight", self.mix_weight),
            ("salary.probability", self.salary.probability),
            ("gambling.probability", self.gambling.probability),
            ("gambling.win_probability", self.gambling.win_probability),
            ("gambling.lottery_probability", self.gambling.lottery_probability),
            ("distress.rdd_probability", self.distress.rdd_probability),
            ("distress.debt_management_probability", self.distress.debt_management_probability),
            ("distress.bnpl_probability", self.distress.bnpl_probability),
            ("credit.payday_probability", self.credit.payday_probability),
            ("planning.insurance_probability", self.planning.insurance_probability),
            ("planning.pension_probability", self.planning.pension_probability),
            ("planning.savings_probability", self.planning.savings_probability),
            ("planning.pension_income_probability", self.planning.pension_income_probability),
            ("benefits.child", self.benefits.child),
            ("benefits.child_tax_credit", self.benefits.child_tax_credit),
            ("benefits.carer", self.benefits.carer),
            ("benefits.disability", self.benefits.disability),
            ("benefits.universal_credit", self.benefits.universal_credit),
            ("benefits.working_tax_credit", self.benefits.working_tax_credit),
            ("benefits.employment_support", self.benefits.employment_support),
        ];
        for (field, p) in probabilities {
            probability(&format!("{n}.{field}"), p)?;
        }
        let rates = [
            ("age.mean", self.age.mean),
            ("age.sd", self.age.sd),
            ("salary.amount_gbp", self.salary.amount_gbp),
            ("salary.cv", self.salary.cv),
            ("salary.jitter", self.salary.jitter),
            ("balance.target_sd_gbp", self.balance.target_sd_gbp),
            ("balance.monthly_sd_gbp", self.balance.monthly_sd_gbp),
            ("gambling.bets_per_month", self.gambling.bets_per_month),
            ("gambling.stake_gbp", self.gambling.stake_gbp),
            ("distress.rdd_per_month", self.distress.rdd_per_month),
            ("distress.debt_management_gbp", self.distress.debt_management_gbp),
            ("distress.bnpl_per_month", self.distress.bnpl_per_month),
            ("distress.bnpl_gbp", self.distress.bnpl_gbp),
            ("credit.traditional_cards", self.credit.traditional_cards),
            ("credit.nontraditional_cards", self.credit.nontraditional_cards),
            ("credit.card_payment_gbp", self.credit.card_payment_gbp),
            ("credit.traditional_loans", self.credit.traditional_loans),
            ("credit.nontraditional_loans", self.credit.nontraditional_loans),
            ("credit.loan_payment_gbp", self.credit.loan_payment_gbp),
            ("planning.insurance_gbp", self.planning.insurance_gbp),
            ("planning.pension_gbp", self.planning.pension_gbp),
            ("planning.savings_gbp", self.planning.savings_gbp),
            ("planning.pension_income_gbp", self.planning.pension_income_gbp),
            ("other_income.transfers_per_month", self.other_income.transfers_per_month),
            ("other_income.transfer_gbp", self.other_income.transfer_gbp),
        ];
        for (field, v) in rates {
            non_negative(&format!("{n}.{field}"), v)?;
        }
        if !self.balance.target_gbp.is_finite() {
            return Err(Error::Config(format!("{n}.balance.target_gbp must be finite")));
        }
        for (code, rate) in &self.spend {
            let cat = Category::from_code(code)
                .ok_or_else(|| Error::Config(format!("{n}.spend: unknown category '{code}'")))?;
            if !cat.flow_class().is_expenditure() {
                return Err(Error::Config(format!("{n}.spend: '{code}' is not an expenditure category")));
            }
            non_negative(&format!("{n}.spend.{code}.count"), rate.count)?;
            non_negative(&format!("{n}.spend.{code}.amount_gbp"), rate.amount_gbp)?;
        }
        Ok(())
    }

    pub(crate) fn spend_rates(&self) -> Vec<(Category, &SpendRate, bool)> {
        self.spend
            .iter()
            .map(|(code, rate)| {
                let cat = Category::from_code(code).expect("validated");
                let recurring = rate.recurring.unwrap_or(cat.flow_class() == FlowClass::Fixed);
                (cat, rate, recurring)
            })
            .collect()
    }
}
