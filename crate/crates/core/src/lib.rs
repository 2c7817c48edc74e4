//! Core data handling for the fvkit transaction-analytics toolkit.
//!
//! The crate covers everything that happens before model fitting:
//!
//! - [`ingest`]: parsing canonical transaction files, grouping them into
//!   per-account histories, eligibility filtering and salary detection.
//! - [`rules`]: keyword enrichment of transaction references.
//! - [`features`]: the engineered behavioural feature vector.
//! - [`labels`]: vulnerability indicators and protected-attribute proxies.
//! - [`synthgen`]: reproducible synthetic cohorts with planted signals.

pub mod error;
pub mod features;
pub mod history;
pub mod ingest;
pub mod labels;
pub mod rng;
pub mod rules;
pub mod synthgen;
pub mod taxonomy;

pub use error::{Error, Result};
pub use history::{AccountHistory, Demographics, Gender};
pub use ingest::Transaction;
pub use rules::{KeywordRuleSet, Tags};
pub use taxonomy::{BenefitType, Category, FlowClass};
