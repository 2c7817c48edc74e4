//! How well protected attributes can be predicted from behaviour, with
//! and without the direct proxy columns.

use serde::{Deserialize, Serialize};

use fvkit_learn::{run_target, Dataset, Error as LearnError, EvalReport, FeatureImportance, ProtocolConfig};

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageThresholds {
    pub direct: f64,
    pub indirect: f64,
}

impl Default for LeakageThresholds {
    fn default() -> Self {
        LeakageThresholds { direct: 0.8, indirect: 0.7 }
    }
}

/// Allowed shortfall of the all-feature AUROC below the stripped one.
pub const ORDERING_TOLERANCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Direct,
    Indirect,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageRun {
    /// Kind with the best mean cross-validated AUROC.
    pub best_kind: String,
    pub auroc: Option<f64>,
    pub per_kind: Vec<(String, Option<f64>)>,
    /// Best tree model's ten largest importances.
    pub top_importances: Vec<FeatureImportance>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeLeakage {
    pub attribute: String,
    pub all: LeakageRun,
    pub stripped: LeakageRun,
    pub verdict: Verdict,
    pub ordering_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub attributes: Vec<AttributeLeakage>,
    pub skipped: Vec<(String, String)>,
    pub stripped_columns: Vec<String>,
    pub thresholds: LeakageThresholds,
}

fn best_cv(r: &EvalReport) -> f64 {
    r.grid.iter().map(|g| g.cv_auroc).fold(f64::NEG_INFINITY, f64::max)
}

fn pick_best<'a>(reports: impl Iterator<Item = &'a EvalReport>) -> Option<&'a EvalReport> {
    reports.fold(None, |b: Option<&EvalReport>, r| if b.is_none_or(|b| best_cv(r) > best_cv(b)) { Some(r) } else { b })
}

fn summarize(reports: &[EvalReport]) -> LeakageRun {
    let best = pick_best(reports.iter()).expect("at least one model kind");
    let mut top = pick_best(reports.iter().filter(|r| r.importance.is_some()))
        .and_then(|r| r.importance.clone())
        .unwrap_or_default();
    top.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.feature.cmp(&b.feature)));
    top.truncate(10);
    LeakageRun {
        best_kind: best.kind.to_string(),
        auroc: best.metrics.auroc,
        per_kind: reports.iter().map(|r| (r.kind.to_string(), r.metrics.auroc)).collect(),
        top_importances: top,
    }
}

pub fn verdict(all: Option<f64>, stripped: Option<f64>, th: &LeakageThresholds) -> Verdict {
    if stripped.is_some_and(|a| a >= th.indirect) {
        Verdict::Indirect
    } else if all.is_some_and(|a| a >= th.direct) {
        Verdict::Direct
    } else {
        Verdict::None
    }
}

/// Run the learning protocol twice per attribute: on every feature, and
/// without `strip`.
pub fn measure_leakage(
    data: &Dataset,
    attributes: &[(String, Vec<Option<bool>>)],
    strip: &[String],
    protocol: &ProtocolConfig,
    thresholds: &LeakageThresholds,
) -> Result<LeakageReport> {
    let stripped_data = data.without_features(strip);
    let mut report = LeakageReport {
        attributes: Vec::new(),
        skipped: Vec::new(),
        stripped_columns: strip.iter().filter(|s| data.feature_names.contains(s)).cloned().collect(),
        thresholds: *thresholds,
    };
    for (name, target) in attributes {
        let all = match run_target(data, name, target, protocol) {
            Ok(r) => r,
            Err(e @ (LearnError::SingleClass(_) | LearnError::NoLaterWindow)) => {
                log::warn!("leakage: skipping {name}: {e}");
                report.skipped.push((name.clone(), e.to_string()));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let stripped = run_target(&stripped_data, name, target, protocol)?;
        let all: Vec<EvalReport> = all.into_iter().map(|(r, _)| r).collect();
        let stripped: Vec<EvalReport> = stripped.into_iter().map(|(r, _)| r).collect();
        let all = summarize(&all);
        let stripped = summarize(&stripped);
        let ordering_holds = match (all.auroc, stripped.auroc) {
            (Some(a), Some(s)) => a >= s - ORDERING_TOLERANCE,
            _ => true,
        };
        if !ordering_holds {
            log::warn!("leakage: {name} stripped AUROC exceeds the all-feature AUROC by more than {ORDERING_TOLERANCE}");
        }
        report.attributes.push(AttributeLeakage {
            attribute: name.clone(),
            verdict: verdict(all.auroc, stripped.auroc, thresholds),
            all,
            stripped,
            ordering_holds,
        });
    }
    Ok(report)
}
