//! Keyword enrichment of transaction references.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use bitflags::bitflags;

use crate::error::{Error, Result};
use crate::taxonomy::BenefitType;

const DEFAULT_RULES: &str = include_str!("../data/keyword_rules.txt");

bitflags! {
    /// Tags attached to a transaction reference.
    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
    pub struct Tags: u16 {
        const GAMBLING = 1 << 0;
        const TRADITIONAL_CARD = 1 << 1;
        const NONTRADITIONAL_CARD = 1 << 2;
        const TRADITIONAL_LOAN = 1 << 3;
        const NONTRADITIONAL_LOAN = 1 << 4;
        const PAYDAY = 1 << 5;
        const BNPL = 1 << 6;
        const NON_SALARY = 1 << 7;
        const BENEFIT_DISABILITY = 1 << 8;
        const BENEFIT_CARER = 1 << 9;
        const BENEFIT_CHILD = 1 << 10;
        const BENEFIT_CHILD_TAX_CREDIT = 1 << 11;
        const BENEFIT_WORKING_TAX_CREDIT = 1 << 12;
        const BENEFIT_UNIVERSAL_CREDIT = 1 << 13;
        const BENEFIT_EMPLOYMENT_SUPPORT = 1 << 14;
    }
}

impl Tags {
    pub const ANY_BENEFIT: Tags = Tags::BENEFIT_DISABILITY
        .union(Tags::BENEFIT_CARER)
        .union(Tags::BENEFIT_CHILD)
        .union(Tags::BENEFIT_CHILD_TAX_CREDIT)
        .union(Tags::BENEFIT_WORKING_TAX_CREDIT)
        .union(Tags::BENEFIT_UNIVERSAL_CREDIT)
        .union(Tags::BENEFIT_EMPLOYMENT_SUPPORT);

    pub fn benefit(b: BenefitType) -> Tags {
        Tags::from_bits_truncate(1 << (8 + b.index()))
    }

    /// First benefit subtype tagged, in [`BenefitType::ALL`] order.
    pub fn benefit_type(self) -> Option<BenefitType> {
        BenefitType::ALL.into_iter().find(|b| self.contains(Tags::benefit(*b)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleClass {
    Gambling,
    TraditionalCard,
    NontraditionalCard,
    TraditionalLoan,
    NontraditionalLoan,
    Payday,
    Bnpl,
    NonSalary,
    Benefit(BenefitType),
}

impl RuleClass {
    pub fn tag(self) -> Tags {
        match self {
            RuleClass::Gambling => Tags::GAMBLING,
            RuleClass::TraditionalCard => Tags::TRADITIONAL_CARD,
            RuleClass::NontraditionalCard => Tags::NONTRADITIONAL_CARD,
            RuleClass::TraditionalLoan => Tags::TRADITIONAL_LOAN,
            RuleClass::NontraditionalLoan => Tags::NONTRADITIONAL_LOAN,
            RuleClass::Payday => Tags::PAYDAY,
            RuleClass::Bnpl => Tags::BNPL,
            RuleClass::NonSalary => Tags::NON_SALARY,
            RuleClass::Benefit(b) => Tags::benefit(b),
        }
    }
}

impl fmt::Display for RuleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleClass::Gambling => f.write_str("gambling"),
            RuleClass::TraditionalCard => f.write_str("traditional_card"),
            RuleClass::NontraditionalCard => f.write_str("nontraditional_card"),
            RuleClass::TraditionalLoan => f.write_str("traditional_loan"),
            RuleClass::NontraditionalLoan => f.write_str("nontraditional_loan"),
            RuleClass::Payday => f.write_str("payday"),
            RuleClass::Bnpl => f.write_str("bnpl"),
            RuleClass::NonSalary => f.write_str("non_salary"),
            RuleClass::Benefit(b) => write!(f, "benefit:{}", b.code()),
        }
    }
}

impl FromStr for RuleClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        Ok(match s {
            "gambling" => RuleClass::Gambling,
            "traditional_card" => RuleClass::TraditionalCard,
            "nontraditional_card" => RuleClass::NontraditionalCard,
            "traditional_loan" => RuleClass::TraditionalLoan,
            "nontraditional_loan" => RuleClass::NontraditionalLoan,
            "payday" => RuleClass::Payday,
            "bnpl" => RuleClass::Bnpl,
            "non_salary" => RuleClass::NonSalary,
            other => {
                let sub = other
                    .strip_prefix("benefit:")
                    .ok_or_else(|| format!("unknown rule class '{other}'"))?;
                RuleClass::Benefit(
                    BenefitType::from_code(sub.trim())
                        .ok_or_else(|| format!("unknown benefit subtype '{sub}'"))?,
                )
            }
        })
    }
}

/// Lowercase and collapse whitespace runs to a single space.
pub fn normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        for ch in word.chars() {
            out.extend(ch.to_lowercase());
        }
    }
    out
}

/// Immutable set of keyword rules; cheap to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordRuleSet {
    rules: Vec<(RuleClass, String)>,
}

impl KeywordRuleSet {
    /// Build and validate a rule set.
    pub fn new(rules: Vec<(RuleClass, String)>) -> Result<Self> {
        let set = KeywordRuleSet { rules };
        set.validate()?;
        Ok(set)
    }

    /// The representative rule list shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_RULES).expect("built-in keyword rules are valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parse the `class: term` text format. Blank lines and `#` comments are
    /// ignored; terms are normalised on load.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (class, term) = line.rsplit_once(':').ok_or_else(|| Error::Rules {
                line: i + 1,
                reason: "expected 'class: term'".into(),
            })?;
            let class = class
                .parse::<RuleClass>()
                .map_err(|reason| Error::Rules { line: i + 1, reason })?;
            let term = normalize(term);
            if term.is_empty() {
                return Err(Error::Rules { line: i + 1, reason: "empty term".into() });
            }
            rules.push((class, term));
        }
        Self::new(rules)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (class, term) in &self.rules {
            out.push_str(&format!("{class}: {term}\n"));
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let mut owner: HashMap<&str, RuleClass> = HashMap::new();
        for (i, (class, term)) in self.rules.iter().enumerate() {
            if term.is_empty() || *term != normalize(term) {
                return Err(Error::Rules {
                    line: i + 1,
                    reason: format!("term '{term}' must be non-empty, lowercase and normalised"),
                });
            }
            if let Some(prev) = owner.insert(term.as_str(), *class) {
                if prev != *class {
                    return Err(Error::Rules {
                        line: i + 1,
                        reason: format!("term '{term}' appears in both {prev} and {class}"),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn rules(&self) -> &[(RuleClass, String)] {
        &self.rules
    }

    pub fn terms(&self, class: RuleClass) -> impl Iterator<Item = &str> {
        self.rules.iter().filter(move |(c, _)| *c == class).map(|(_, t)| t.as_str())
    }

    /// All tags whose terms occur in the description.
    pub fn classify(&self, description: &str) -> Tags {
        self.classify_normalized(&normalize(description))
    }

    pub fn classify_normalized(&self, normalized: &str) -> Tags {
        let mut tags = Tags::empty();
        for (class, term) in &self.rules {
            if normalized.contains(term.as_str()) {
                tags |= class.tag();
            }
        }
        tags
    }

    /// Terms of `class` found in an already normalised description.
    pub fn matched_terms<'a, 'b>(
        &'a self,
        normalized: &'b str,
        class: RuleClass,
    ) -> impl Iterator<Item = &'a str> + use<'a, 'b> {
        self.terms(class).filter(move |t| normalized.contains(t))
    }
}

/// Free-function form used by the pipeline: all tags for a reference.
pub fn classify_reference(description: &str, rules: &KeywordRuleSet) -> Tags {
    rules.classify(description)
}
