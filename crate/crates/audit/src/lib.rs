//! Fairness audit over features, vulnerability labels and protected
//! attributes.

pub mod composition;
pub mod correlation;
pub mod error;
pub mod io;
pub mod leakage;

pub use composition::{composition, CompositionCell, CompositionReport, DEFAULT_LIFT};
pub use correlation::{correlation_matrix, p_value, pearson, CorrelationReport, Pearson, SIGNIFICANCE};
pub use error::{Error, Result};
pub use io::Provenance;
pub use leakage::{measure_leakage, verdict, AttributeLeakage, LeakageReport, LeakageRun, LeakageThresholds, Verdict};
