//! Pipeline configuration: one TOML file with every tunable value.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fvkit_audit::{LeakageThresholds, DEFAULT_LIFT};
use fvkit_core::features::schema::benefit_feature_names;
use fvkit_core::features::{feature_index, FeatureConfig, SHOCK_THRESHOLD_PENCE};
use fvkit_core::ingest::MIN_MONTHS;
use fvkit_core::labels::{FviLabelSet, LabelThresholds};
use fvkit_core::synthgen::CohortConfig;
use fvkit_learn::{GridConfig, ModelKind, ProtocolConfig};
use fvkit_segment::SegmentConfig;

use crate::error::validation;

pub const PROTECTED_ATTRIBUTES: [&str; 4] = ["female", "disability", "carer", "has_child"];

/// File locations. An empty string selects the default noted per field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    pub stage_dir: String,
    /// Transaction file (CSV or JSONL); empty reads the synth stage output.
    pub input: String,
    /// Demographics CSV; empty reads the synth stage output when the input
    /// is synthetic, otherwise none.
    pub demographics: String,
    /// Keyword rule file; empty uses the built-in rules.
    pub keyword_rules: String,
    /// Persona table for the generator; empty uses the built-in personas.
    pub personas: String,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            stage_dir: "fvkit-out".into(),
            input: String::new(),
            demographics: String::new(),
            keyword_rules: String::new(),
            personas: String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub n_accounts: usize,
    pub months_per_account: u32,
    pub planted_proxy_strength: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let c = CohortConfig::default();
        SynthConfig {
            n_accounts: c.n_accounts,
            months_per_account: c.months_per_account,
            planted_proxy_strength: c.planted_proxy_strength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeaturesConfig {
    pub shock_threshold_pence: i64,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        FeaturesConfig { shock_threshold_pence: SHOCK_THRESHOLD_PENCE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnConfig {
    pub train_fraction: f64,
    /// Last time key of the training window; absent splits by
    /// `train_fraction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_window: Option<i32>,
    pub cv_folds: usize,
    pub models: Vec<ModelKind>,
    /// Drop the columns a vulnerability label is computed from when
    /// training that label.
    pub exclude_defining_features: bool,
    pub grid: GridConfig,
}

impl Default for LearnConfig {
    fn default() -> Self {
        let p = ProtocolConfig::default();
        LearnConfig {
            train_fraction: p.train_fraction,
            train_window: p.train_window,
            cv_folds: p.cv_folds,
            models: p.models,
            exclude_defining_features: true,
            grid: p.grid,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    pub attributes: Vec<String>,
    /// Columns removed for the stripped leakage run.
    pub strip_columns: Vec<String>,
    pub lift_factor: f64,
    pub leakage: LeakageThresholds,
}

impl Default for AuditConfig {
    fn default() -> Self {
        AuditConfig {
            attributes: PROTECTED_ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
            strip_columns: benefit_feature_names(),
            lift_factor: DEFAULT_LIFT,
            leakage: LeakageThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub top_importances: usize,
    /// Model kind whose importances the report lists.
    pub importance_model: ModelKind,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { top_importances: 8, importance_model: ModelKind::Gbt }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub paths: PathsConfig,
    pub synth: SynthConfig,
    pub features: FeaturesConfig,
    pub labels: LabelThresholds,
    pub learn: LearnConfig,
    pub segment: SegmentConfig,
    pub audit: AuditConfig,
    pub report: ReportConfig,
}

const HEADER: &str = "\
# fvkit pipeline configuration.
# Optional keys left out below: learn.train_window, segment.columns,
# segment.n_components, segment.k, segment.tsne.perplexity and
# segment.tsne.learning_rate. Leaving them out selects the automatic choice.
# A learn.grid.rf_max_depth of 0 grows trees until leaves are pure.

";

impl PipelineConfig {
    pub fn defaults() -> PipelineConfig {
        PipelineConfig { seed: 7, ..Default::default() }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(format!("{HEADER}{}", toml::to_string(self).context("serializing configuration")?))
    }

    pub fn parse(text: &str) -> Result<PipelineConfig> {
        toml::from_str(text).map_err(|e| validation(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| validation(format!("cannot read config {}: {e}", path.display())))?;
        PipelineConfig::parse(&text)
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let text = toml::to_string(self).expect("configuration serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn stage_dir(&self) -> PathBuf {
        PathBuf::from(&self.paths.stage_dir)
    }

    pub fn cohort(&self) -> CohortConfig {
        CohortConfig {
            n_accounts: self.synth.n_accounts,
            months_per_account: self.synth.months_per_account,
            seed: self.seed,
            planted_proxy_strength: self.synth.planted_proxy_strength,
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig { shock_threshold_pence: self.features.shock_threshold_pence }
    }

    pub fn protocol(&self, seed: u64) -> ProtocolConfig {
        ProtocolConfig {
            train_fraction: self.learn.train_fraction,
            train_window: self.learn.train_window,
            cv_folds: self.learn.cv_folds,
            models: self.learn.models.clone(),
            grid: self.learn.grid.clone(),
            seed,
        }
    }

    /// Every rule violation, in field order.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                v.push(msg);
            }
        };
        let p = &self.paths;
        check(!p.stage_dir.trim().is_empty(), "paths.stage_dir must not be empty".into());

        let s = &self.synth;
        check(s.n_accounts >= 1, "synth.n_accounts must be at least 1".into());
        check(
            s.months_per_account >= MIN_MONTHS,
            format!("synth.months_per_account {} must be at least {MIN_MONTHS}", s.months_per_account),
        );
        check(
            (0.0..=1.0).contains(&s.planted_proxy_strength),
            format!("synth.planted_proxy_strength {} must lie in [0, 1]", s.planted_proxy_strength),
        );

        check(self.features.shock_threshold_pence >= 0, "features.shock_threshold_pence must be >= 0".into());

        let l = &self.labels;
        check(l.shock_pence >= 0, "labels.shock_pence must be >= 0".into());
        check(l.disposable_pence >= 0, "labels.disposable_pence must be >= 0".into());
        check(l.gambling_pence >= 0, "labels.gambling_pence must be >= 0".into());
        check(
            l.month_share > 0.0 && l.month_share < 1.0,
            format!("labels.month_share {} must lie in (0, 1)", l.month_share),
        );
        check(
            l.rdd_per_month > 0.0 && l.rdd_per_month.is_finite(),
            format!("labels.rdd_per_month {} must be positive", l.rdd_per_month),
        );

        let m = &self.learn;
        check(
            m.train_fraction > 0.0 && m.train_fraction < 1.0,
            format!("learn.train_fraction {} must lie in (0, 1)", m.train_fraction),
        );
        check(m.cv_folds >= 2, format!("learn.cv_folds {} must be at least 2", m.cv_folds));
        check(!m.models.is_empty(), "learn.models must name at least one model".into());
        let g = &m.grid;
        check(!g.lr_lambda.is_empty(), "learn.grid.lr_lambda must not be empty".into());
        check(
            g.lr_lambda.iter().all(|&x| x >= 0.0 && x.is_finite()),
            "learn.grid.lr_lambda values must be finite and >= 0".into(),
        );
        check(!g.rf_max_depth.is_empty(), "learn.grid.rf_max_depth must not be empty".into());
        check(g.rf_trees >= 1, "learn.grid.rf_trees must be at least 1".into());
        check(g.gbt_trees >= 1, "learn.grid.gbt_trees must be at least 1".into());
        check(!g.gbt_max_depth.is_empty(), "learn.grid.gbt_max_depth must not be empty".into());
        check(g.gbt_max_depth.iter().all(|&d| d >= 1), "learn.grid.gbt_max_depth values must be >= 1".into());
        check(!g.gbt_shrinkage.is_empty(), "learn.grid.gbt_shrinkage must not be empty".into());
        check(
            g.gbt_shrinkage.iter().all(|&x| x > 0.0 && x <= 1.0),
            "learn.grid.gbt_shrinkage values must lie in (0, 1]".into(),
        );
        check(g.gbt_lambda >= 0.0, "learn.grid.gbt_lambda must be >= 0".into());
        check(g.gbt_min_child_weight >= 0.0, "learn.grid.gbt_min_child_weight must be >= 0".into());

        let c = &self.segment;
        check(
            c.variance_target > 0.0 && c.variance_target <= 1.0,
            format!("segment.variance_target {} must lie in (0, 1]", c.variance_target),
        );
        check(c.n_components != Some(0), "segment.n_components must be at least 1".into());
        check(
            c.k_min >= 2 && c.k_max <= 12 && c.k_min <= c.k_max,
            format!("segment k range {}..={} must lie within 2..=12", c.k_min, c.k_max),
        );
        if let Some(k) = c.k {
            check(k >= 1, "segment.k must be at least 1".into());
        }
        if let Some(cols) = &c.columns {
            for col in cols.iter().filter(|col| feature_index(col).is_none()) {
                check(false, format!("segment.columns names unknown feature '{col}'"));
            }
        }
        check(c.kmeans.restarts >= 1, "segment.kmeans.restarts must be at least 1".into());
        check(c.kmeans.max_iterations >= 1, "segment.kmeans.max_iterations must be at least 1".into());
        check(c.tsne.iterations >= 1, "segment.tsne.iterations must be at least 1".into());
        if let Some(p) = c.tsne.perplexity {
            check(p > 0.0, format!("segment.tsne.perplexity {p} must be positive"));
        }
        if let Some(r) = c.tsne.learning_rate {
            check(r > 0.0, format!("segment.tsne.learning_rate {r} must be positive"));
        }
        check(c.tsne.early_exaggeration >= 1.0, "segment.tsne.early_exaggeration must be >= 1".into());

        let a = &self.audit;
        check(!a.attributes.is_empty(), "audit.attributes must not be empty".into());
        for name in a.attributes.iter().filter(|n| !PROTECTED_ATTRIBUTES.contains(&n.as_str())) {
            check(false, format!("audit.attributes names unknown attribute '{name}'"));
        }
        for col in a.strip_columns.iter().filter(|col| feature_index(col).is_none()) {
            check(false, format!("audit.strip_columns names unknown feature '{col}'"));
        }
        check(a.lift_factor > 0.0, format!("audit.lift_factor {} must be positive", a.lift_factor));
        let t = &a.leakage;
        check(
            (0.5..=1.0).contains(&t.direct) && (0.5..=1.0).contains(&t.indirect),
            "audit.leakage thresholds must lie in [0.5, 1]".into(),
        );

        check(self.report.top_importances >= 1, "report.top_importances must be at least 1".into());
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            return Ok(());
        }
        let list: Vec<String> = v.iter().map(|m| format!("  - {m}")).collect();
        Err(validation(format!("configuration has {} violation(s):\n{}", v.len(), list.join("\n"))))
    }
}

/// Target names in training order: the ten indicators, then the protected
/// attributes.
pub fn target_names() -> Vec<String> {
    FviLabelSet::NAMES.iter().chain(PROTECTED_ATTRIBUTES.iter()).map(|s| s.to_string()).collect()
}
