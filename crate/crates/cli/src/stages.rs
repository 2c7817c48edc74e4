//! Pipeline stages. Each stage reads its inputs from the stage directory,
//! writes its outputs there and reports both sets of files.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};

use fvkit_audit::{composition, correlation_matrix, measure_leakage, Provenance};
use fvkit_core::features::io::{feature_dictionary_json, read_table, write_table};
use fvkit_core::features::{extract_all, Table};
use fvkit_core::history::{read_demographics, write_demographics};
use fvkit_core::ingest::{
    filter_eligible, parse_transactions, write_eligibility_csv, write_rejections_csv, write_transactions_csv, Format,
};
use fvkit_core::labels::{
    derive_protected, label_account, read_labels_csv, read_protected_csv, write_labels_csv, write_protected_csv,
    FviLabelSet, ProtectedProfile,
};
use fvkit_core::synthgen::{describe_cohort, generate_cohort, write_summary_csv, PersonaSet};
use fvkit_core::{rng, AccountHistory, KeywordRuleSet};
use fvkit_learn::{run_matrix, Dataset};
use fvkit_segment::io::{write_clusters_csv, write_diagnostics_csv, write_embedding_csv, write_profile_csv};
use fvkit_segment::{profile_clusters, segment, Column};

use crate::config::{PipelineConfig, PROTECTED_ATTRIBUTES};
use crate::error::{missing, validation};
use crate::manifest::{digest_files, StageRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Synth,
    Ingest,
    Features,
    Label,
    Train,
    Cluster,
    Audit,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Synth,
        Stage::Ingest,
        Stage::Features,
        Stage::Label,
        Stage::Train,
        Stage::Cluster,
        Stage::Audit,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Synth => "synth",
            Stage::Ingest => "ingest",
            Stage::Features => "features",
            Stage::Label => "label",
            Stage::Train => "train",
            Stage::Cluster => "cluster",
            Stage::Audit => "audit",
            Stage::Report => "report",
        }
    }
}

pub mod files {
    pub const SYNTH_TRANSACTIONS: &str = "synth/transactions.csv";
    pub const SYNTH_DEMOGRAPHICS: &str = "synth/demographics.csv";
    pub const SYNTH_TRUTH: &str = "synth/ground_truth.csv";
    pub const SYNTH_SUMMARY: &str = "synth/summary.csv";
    pub const TRANSACTIONS: &str = "ingest/transactions.csv";
    pub const REJECTIONS: &str = "ingest/rejections.csv";
    pub const ELIGIBILITY: &str = "ingest/eligibility.csv";
    pub const DEMOGRAPHICS: &str = "ingest/demographics.csv";
    pub const FEATURES: &str = "features/features.csv";
    pub const ACCOUNTS: &str = "features/accounts.csv";
    pub const DICTIONARY: &str = "features/dictionary.json";
    pub const LABELS: &str = "labels/labels.csv";
    pub const PROTECTED: &str = "labels/protected.csv";
    pub const METRICS: &str = "train/metrics.csv";
    pub const IMPORTANCES: &str = "train/importances.csv";
    pub const EVALUATIONS: &str = "train/evaluations.json";
    pub const MODELS: &str = "train/models";
    pub const CLUSTERS: &str = "cluster/clusters.csv";
    pub const DIAGNOSTICS: &str = "cluster/diagnostics.csv";
    pub const PROFILE: &str = "cluster/profile.csv";
    pub const PCA: &str = "cluster/pca.csv";
    pub const EMBEDDING: &str = "cluster/embedding.csv";
    pub const CORRELATION: &str = "audit/correlation_report.csv";
    pub const LEAKAGE: &str = "audit/leakage_report.json";
    pub const COMPOSITION: &str = "audit/composition.csv";
    pub const REPORT_JSON: &str = "report/report.json";
    pub const REPORT_METRICS: &str = "report/metric_grid.csv";
    pub const REPORT_IMPORTANCES: &str = "report/top_importances.csv";
    pub const REPORT_PROFILE: &str = "report/cluster_profile.csv";
    pub const REPORT_LEAKAGE: &str = "report/leakage_summary.csv";
}

pub struct Ctx<'a> {
    pub cfg: &'a PipelineConfig,
    pub dir: PathBuf,
    pub config_hash: String,
}

/// Files a stage read and wrote.
#[derive(Debug, Default)]
pub struct Io {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
}

impl Io {
    pub fn into_record(self, root: &Path) -> Result<StageRecord> {
        Ok(StageRecord {
            inputs: digest_files(root, &self.inputs)?,
            outputs: digest_files(root, &self.outputs)?,
            seed: self.seed,
            wall_clock_seconds: 0.0,
        })
    }
}

impl Ctx<'_> {
    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.join(rel)
    }

    /// Path of an upstream artifact; absent files name the stage to run.
    fn require(&self, stage: Stage, rel: &str) -> Result<PathBuf> {
        let p = self.path(rel);
        if p.is_file() {
            Ok(p)
        } else {
            Err(missing(stage.name(), &p))
        }
    }

    fn create(&self, rel: &str) -> Result<BufWriter<File>> {
        let p = self.path(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        Ok(BufWriter::new(File::create(&p).with_context(|| format!("creating {}", p.display()))?))
    }

    fn config_file(&self, value: &str) -> Option<PathBuf> {
        (!value.trim().is_empty()).then(|| PathBuf::from(value))
    }

    fn rules(&self, io: &mut Io) -> Result<KeywordRuleSet> {
        match self.config_file(&self.cfg.paths.keyword_rules) {
            None => Ok(KeywordRuleSet::builtin()),
            Some(p) => {
                if !p.is_file() {
                    return Err(validation(format!("keyword rule file {} not found", p.display())));
                }
                io.inputs.push(p.clone());
                KeywordRuleSet::load(&p).map_err(|e| validation(format!("keyword rules {}: {e}", p.display())))
            }
        }
    }

    fn provenance(&self, seed: u64) -> Provenance {
        Provenance { config_hash: self.config_hash.clone(), seed }
    }
}

pub fn run_stage(ctx: &Ctx, stage: Stage) -> Result<Io> {
    match stage {
        Stage::Synth => synth(ctx),
        Stage::Ingest => ingest(ctx),
        Stage::Features => features(ctx),
        Stage::Label => label(ctx),
        Stage::Train => train(ctx),
        Stage::Cluster => cluster(ctx),
        Stage::Audit => audit(ctx),
        Stage::Report => crate::report::report(ctx),
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn synth(ctx: &Ctx) -> Result<Io> {
    let mut io = Io { seed: Some(ctx.cfg.seed), ..Default::default() };
    let personas = match ctx.config_file(&ctx.cfg.paths.personas) {
        None => PersonaSet::builtin(),
        Some(p) => {
            io.inputs.push(p.clone());
            PersonaSet::load(&p).map_err(|e| validation(format!("persona file {}: {e}", p.display())))?
        }
    };
    let rules = ctx.rules(&mut io)?;
    let cohort = generate_cohort(&ctx.cfg.cohort(), &personas).map_err(|e| validation(e.to_string()))?;
    log::info!("generated {} accounts, {} transactions", cohort.truth.len(), cohort.n_transactions());
    cohort.write_transactions(ctx.create(files::SYNTH_TRANSACTIONS)?)?;
    cohort.write_demographics(ctx.create(files::SYNTH_DEMOGRAPHICS)?)?;
    cohort.write_ground_truth(ctx.create(files::SYNTH_TRUTH)?)?;
    let summary = describe_cohort(&cohort.histories(&rules), &cohort.truth)?;
    write_summary_csv(ctx.create(files::SYNTH_SUMMARY)?, &summary)?;
    for f in [files::SYNTH_TRANSACTIONS, files::SYNTH_DEMOGRAPHICS, files::SYNTH_TRUTH, files::SYNTH_SUMMARY] {
        io.outputs.push(ctx.path(f));
    }
    Ok(io)
}

fn read_histories(path: &Path, rules: &KeywordRuleSet) -> Result<Vec<AccountHistory>> {
    let outcome = parse_transactions(BufReader::new(File::open(path)?), Format::Csv)
        .with_context(|| format!("reading {}", path.display()))?;
    if let Some(r) = outcome.rejections.first() {
        return Err(anyhow!("{} line {}: {}", path.display(), r.line, r.reason));
    }
    Ok(AccountHistory::from_transactions(outcome.transactions, rules))
}

fn ingest(ctx: &Ctx) -> Result<Io> {
    let mut io = Io::default();
    let rules = ctx.rules(&mut io)?;
    let (input, synthetic) = match ctx.config_file(&ctx.cfg.paths.input) {
        Some(p) if p.is_file() => (p, false),
        Some(p) => return Err(validation(format!("input file {} not found", p.display()))),
        None => (ctx.require(Stage::Synth, files::SYNTH_TRANSACTIONS)?, true),
    };
    io.inputs.push(input.clone());
    let outcome = parse_transactions(BufReader::new(File::open(&input)?), Format::from_path(&input))
        .map_err(|e| validation(format!("{}: {e}", input.display())))?;
    log::info!("parsed {} transactions, rejected {}", outcome.transactions.len(), outcome.rejections.len());
    write_rejections_csv(ctx.create(files::REJECTIONS)?, &outcome.rejections)?;

    let demographics_path = match ctx.config_file(&ctx.cfg.paths.demographics) {
        Some(p) if p.is_file() => Some(p),
        Some(p) => return Err(validation(format!("demographics file {} not found", p.display()))),
        None if synthetic => Some(ctx.require(Stage::Synth, files::SYNTH_DEMOGRAPHICS)?),
        None => None,
    };
    let demographics = match &demographics_path {
        Some(p) => {
            io.inputs.push(p.clone());
            read_demographics(BufReader::new(File::open(p)?)).map_err(|e| validation(format!("{}: {e}", p.display())))?
        }
        None => HashMap::new(),
    };

    let histories = AccountHistory::from_transactions(outcome.transactions, &rules);
    let (kept, report) = filter_eligible(histories);
    log::info!("{} of {} accounts eligible", kept.len(), report.len());
    write_eligibility_csv(ctx.create(files::ELIGIBILITY)?, &report)?;
    write_transactions_csv(ctx.create(files::TRANSACTIONS)?, kept.iter().flat_map(|h| h.transactions.iter()))?;
    write_demographics(
        ctx.create(files::DEMOGRAPHICS)?,
        kept.iter().filter_map(|h| demographics.get(&h.account_id).map(|d| (h.account_id.as_str(), d))),
    )?;
    for f in [files::REJECTIONS, files::ELIGIBILITY, files::TRANSACTIONS, files::DEMOGRAPHICS] {
        io.outputs.push(ctx.path(f));
    }
    Ok(io)
}

fn features(ctx: &Ctx) -> Result<Io> {
    let mut io = Io::default();
    let rules = ctx.rules(&mut io)?;
    let input = ctx.require(Stage::Ingest, files::TRANSACTIONS)?;
    io.inputs.push(input.clone());
    let histories = read_histories(&input, &rules)?;
    let vectors = extract_all(&histories, &rules, &ctx.cfg.feature_config());
    write_table(ctx.create(files::FEATURES)?, &Table::from_vectors(&vectors))?;

    let mut wtr = csv::Writer::from_writer(ctx.create(files::ACCOUNTS)?);
    wtr.write_record(["account_id", "first_date", "last_date", "months", "time_key"])?;
    for h in &histories {
        wtr.write_record([
            h.account_id.clone(),
            h.first_date().map(|d| d.to_string()).unwrap_or_default(),
            h.last_date().map(|d| d.to_string()).unwrap_or_default(),
            h.span_months().to_string(),
            h.time_key().to_string(),
        ])?;
    }
    wtr.flush()?;
    let mut dict = ctx.create(files::DICTIONARY)?;
    dict.write_all(feature_dictionary_json().as_bytes())?;
    dict.write_all(b"\n")?;
    dict.flush()?;
    for f in [files::FEATURES, files::ACCOUNTS, files::DICTIONARY] {
        io.outputs.push(ctx.path(f));
    }
    Ok(io)
}

fn load_features(ctx: &Ctx, io: &mut Io) -> Result<Table> {
    let p = ctx.require(Stage::Features, files::FEATURES)?;
    io.inputs.push(p.clone());
    read_table(BufReader::new(File::open(&p)?)).with_context(|| format!("reading {}", p.display()))
}

fn load_time_keys(ctx: &Ctx, io: &mut Io, ids: &[String]) -> Result<Vec<i32>> {
    let p = ctx.require(Stage::Features, files::ACCOUNTS)?;
    io.inputs.push(p.clone());
    let mut keys = HashMap::new();
    for rec in csv::Reader::from_path(&p)?.records() {
        let rec = rec?;
        keys.insert(rec[0].to_string(), rec[4].parse::<i32>().with_context(|| format!("time key in {}", p.display()))?);
    }
    ids.iter()
        .map(|id| keys.get(id).copied().ok_or_else(|| anyhow!("{} lacks account {id}", p.display())))
        .collect()
}

fn label(ctx: &Ctx) -> Result<Io> {
    let mut io = Io::default();
    let rules = ctx.rules(&mut io)?;
    let table = load_features(ctx, &mut io)?;
    let input = ctx.require(Stage::Ingest, files::TRANSACTIONS)?;
    io.inputs.push(input.clone());
    let histories = read_histories(&input, &rules)?;
    let demo_path = ctx.require(Stage::Ingest, files::DEMOGRAPHICS)?;
    io.inputs.push(demo_path.clone());
    let demographics = read_demographics(BufReader::new(File::open(&demo_path)?))?;

    let mut labels = Vec::with_capacity(histories.len());
    let mut protected = Vec::with_capacity(histories.len());
    for h in &histories {
        let row = table
            .row_of(&h.account_id)
            .ok_or_else(|| anyhow!("features lack account {}; rerun `fvkit features`", h.account_id))?;
        let fv = fvkit_core::features::FeatureVector::new(h.account_id.clone(), table.rows[row].clone());
        labels.push((h.account_id.clone(), label_account(h, &fv, &ctx.cfg.labels)));
        protected.push(derive_protected(h, demographics.get(&h.account_id)));
    }
    write_labels_csv(ctx.create(files::LABELS)?, &labels)?;
    write_protected_csv(ctx.create(files::PROTECTED)?, &protected)?;
    io.outputs.push(ctx.path(files::LABELS));
    io.outputs.push(ctx.path(files::PROTECTED));
    Ok(io)
}

/// Label and protected-attribute columns aligned to `ids`.
struct Targets {
    labels: BTreeMap<String, Vec<Option<bool>>>,
}

impl Targets {
    fn load(ctx: &Ctx, io: &mut Io, ids: &[String]) -> Result<Targets> {
        let lp = ctx.require(Stage::Label, files::LABELS)?;
        let pp = ctx.require(Stage::Label, files::PROTECTED)?;
        io.inputs.push(lp.clone());
        io.inputs.push(pp.clone());
        let labels: HashMap<String, FviLabelSet> =
            read_labels_csv(BufReader::new(File::open(&lp)?))?.into_iter().collect();
        let protected: HashMap<String, ProtectedProfile> = read_protected_csv(BufReader::new(File::open(&pp)?))?
            .into_iter()
            .map(|p| (p.account_id.clone(), p))
            .collect();
        let mut out: BTreeMap<String, Vec<Option<bool>>> = BTreeMap::new();
        for id in ids {
            let l = labels.get(id).ok_or_else(|| anyhow!("labels lack account {id}; rerun `fvkit label`"))?;
            let p = protected.get(id).ok_or_else(|| anyhow!("protected attributes lack account {id}"))?;
            for (name, v) in FviLabelSet::NAMES.iter().zip(l.to_array()) {
                out.entry(name.to_string()).or_default().push(v);
            }
            for (name, v) in p.binary_attributes() {
                out.entry(name.to_string()).or_default().push(v);
            }
        }
        Ok(Targets { labels: out })
    }

    fn column(&self, name: &str) -> Vec<Option<bool>> {
        self.labels.get(name).cloned().unwrap_or_default()
    }
}

fn dataset(table: &Table, time_keys: Vec<i32>) -> Result<Dataset> {
    Ok(Dataset::new(table.ids.clone(), table.columns.clone(), table.rows.clone(), time_keys)?)
}

fn train(ctx: &Ctx) -> Result<Io> {
    let seed = ctx.cfg.seed;
    let mut io = Io { seed: Some(seed), ..Default::default() };
    let table = load_features(ctx, &mut io)?;
    let time_keys = load_time_keys(ctx, &mut io, &table.ids)?;
    let targets = Targets::load(ctx, &mut io, &table.ids)?;
    let data = dataset(&table, time_keys)?;

    let names = crate::config::target_names();
    let columns: Vec<(String, Vec<Option<bool>>)> = names.iter().map(|n| (n.clone(), targets.column(n))).collect();
    let mut exclusions = BTreeMap::new();
    if ctx.cfg.learn.exclude_defining_features {
        for name in FviLabelSet::NAMES {
            let drop: Vec<String> = FviLabelSet::defining_features(name).iter().map(|s| s.to_string()).collect();
            exclusions.insert(name.to_string(), drop);
        }
    }
    let result = run_matrix(&data, &columns, &exclusions, &ctx.cfg.protocol(seed))?;

    let mut wtr = csv::Writer::from_writer(ctx.create(files::METRICS)?);
    wtr.write_record([
        "target", "model", "status", "hyper", "n_train", "n_train_balanced", "n_test", "test_positive_rate",
        "accuracy", "precision", "recall", "f1", "auroc", "tp", "fp", "tn", "fn",
    ])?;
    for name in &names {
        for kind in &ctx.cfg.learn.models {
            match result.reports.iter().find(|r| &r.target == name && r.kind == *kind) {
                Some(r) => {
                    let m = &r.metrics;
                    wtr.write_record([
                        name.clone(),
                        kind.to_string(),
                        "ok".into(),
                        serde_json::to_string(&r.hyper)?,
                        r.n_train.to_string(),
                        r.n_train_balanced.to_string(),
                        r.n_test.to_string(),
                        num(r.test_positive_rate),
                        num(m.accuracy),
                        num(m.precision),
                        num(m.recall),
                        num(m.f1),
                        opt_num(m.auroc),
                        m.confusion.tp.to_string(),
                        m.confusion.fp.to_string(),
                        m.confusion.tn.to_string(),
                        m.confusion.fn_.to_string(),
                    ])?;
                }
                None => {
                    let reason = result
                        .skipped
                        .iter()
                        .find(|s| &s.target == name)
                        .map(|s| format!("skipped: {}", s.reason))
                        .unwrap_or_else(|| "skipped".into());
                    let mut rec = vec![name.clone(), kind.to_string(), reason];
                    rec.extend(std::iter::repeat_n(String::new(), 14));
                    wtr.write_record(&rec)?;
                }
            }
        }
    }
    wtr.flush()?;

    let mut wtr = csv::Writer::from_writer(ctx.create(files::IMPORTANCES)?);
    wtr.write_record(["target", "model", "rank", "feature", "mean", "sd"])?;
    for r in &result.reports {
        if let Some(imp) = &r.importance {
            let mut sorted = imp.clone();
            sorted.sort_by(|a, b| b.mean.total_cmp(&a.mean).then_with(|| a.feature.cmp(&b.feature)));
            for (rank, f) in sorted.iter().enumerate() {
                wtr.write_record([
                    r.target.clone(),
                    r.kind.to_string(),
                    (rank + 1).to_string(),
                    f.feature.clone(),
                    num(f.mean),
                    num(f.sd),
                ])?;
            }
        }
    }
    wtr.flush()?;

    let mut ev = ctx.create(files::EVALUATIONS)?;
    let doc = serde_json::json!({ "reports": result.reports, "skipped": result.skipped });
    serde_json::to_writer_pretty(&mut ev, &doc)?;
    ev.write_all(b"\n")?;
    ev.flush()?;

    let model_dir = ctx.path(files::MODELS);
    if model_dir.exists() {
        fs::remove_dir_all(&model_dir)?;
    }
    fs::create_dir_all(&model_dir)?;
    for (r, m) in result.reports.iter().zip(&result.models) {
        let p = model_dir.join(format!("{}.{}.json", r.target, r.kind.as_str().to_ascii_lowercase()));
        fs::write(&p, m.to_json()?)?;
        io.outputs.push(p);
    }
    for f in [files::METRICS, files::IMPORTANCES, files::EVALUATIONS] {
        io.outputs.push(ctx.path(f));
    }
    Ok(io)
}

fn cluster(ctx: &Ctx) -> Result<Io> {
    let seed = ctx.cfg.seed;
    let mut io = Io { seed: Some(seed), ..Default::default() };
    let table = load_features(ctx, &mut io)?;
    let result = segment(&table.columns, &table.rows, seed, &ctx.cfg.segment).map_err(|e| match e {
        fvkit_segment::Error::Config(_)
        | fvkit_segment::Error::KRange(..)
        | fvkit_segment::Error::PerplexityTooLarge { .. }
        | fvkit_segment::Error::TooFewRows(_)
        | fvkit_segment::Error::TooFewDistinct { .. } => validation(e.to_string()),
        e => anyhow!(e),
    })?;
    if result.selection.weak_structure {
        log::warn!("weak cluster structure: best silhouette below {}", fvkit_segment::WEAK_STRUCTURE);
    }
    write_clusters_csv(ctx.create(files::CLUSTERS)?, &table.ids, &result.assignments)?;
    write_diagnostics_csv(ctx.create(files::DIAGNOSTICS)?, &result.selection.diagnostics, result.selection.recommended)?;

    let columns: Vec<Column> = table
        .columns
        .iter()
        .enumerate()
        .map(|(j, name)| Column { name: name.clone(), values: table.rows.iter().map(|r| r[j]).collect() })
        .collect();
    let profile = profile_clusters(&result.assignments, result.k, &columns)?;
    write_profile_csv(ctx.create(files::PROFILE)?, &profile)?;

    let mut wtr = csv::Writer::from_writer(ctx.create(files::PCA)?);
    wtr.write_record(["component", "explained_ratio", "cumulative_ratio", "retained"])?;
    let mut cum = 0.0;
    for (i, r) in result.pca.explained_ratio.iter().enumerate() {
        cum += r;
        wtr.write_record([
            (i + 1).to_string(),
            num(*r),
            num(cum),
            u8::from(i < result.pca.n_components).to_string(),
        ])?;
    }
    wtr.flush()?;
    for f in [files::CLUSTERS, files::DIAGNOSTICS, files::PROFILE, files::PCA] {
        io.outputs.push(ctx.path(f));
    }

    let embedding = ctx.path(files::EMBEDDING);
    match &result.embedding {
        Some(e) => {
            write_embedding_csv(ctx.create(files::EMBEDDING)?, &table.ids, e)?;
            io.outputs.push(embedding);
        }
        None if embedding.exists() => fs::remove_file(embedding)?,
        None => {}
    }
    Ok(io)
}

fn load_clusters(ctx: &Ctx, io: &mut Io, ids: &[String]) -> Result<(Vec<usize>, usize)> {
    let p = ctx.require(Stage::Cluster, files::CLUSTERS)?;
    io.inputs.push(p.clone());
    let mut map = HashMap::new();
    for rec in csv::Reader::from_path(&p)?.records() {
        let rec = rec?;
        map.insert(rec[0].to_string(), rec[1].parse::<usize>()?);
    }
    let a: Vec<usize> = ids
        .iter()
        .map(|id| map.get(id).copied().ok_or_else(|| anyhow!("clusters lack account {id}; rerun `fvkit cluster`")))
        .collect::<Result<_>>()?;
    let k = a.iter().max().map_or(0, |m| m + 1);
    Ok((a, k))
}

fn audit(ctx: &Ctx) -> Result<Io> {
    let seed = rng::derive_seed(ctx.cfg.seed, "audit");
    let mut io = Io { seed: Some(seed), ..Default::default() };
    let table = load_features(ctx, &mut io)?;
    let time_keys = load_time_keys(ctx, &mut io, &table.ids)?;
    let targets = Targets::load(ctx, &mut io, &table.ids)?;
    let (assignments, k) = load_clusters(ctx, &mut io, &table.ids)?;
    let data = dataset(&table, time_keys)?;
    let prov = ctx.provenance(seed);
    let a = &ctx.cfg.audit;

    let as_num = |v: &[Option<bool>]| v.iter().map(|b| b.map(|b| f64::from(u8::from(b)))).collect::<Vec<_>>();
    let mut corr_cols: Vec<(String, Vec<Option<f64>>)> =
        PROTECTED_ATTRIBUTES.iter().map(|n| (n.to_string(), as_num(&targets.column(n)))).collect();
    corr_cols.extend(FviLabelSet::NAMES.iter().map(|n| (n.to_string(), as_num(&targets.column(n)))));
    let corr = correlation_matrix(&corr_cols);
    fvkit_audit::io::write_correlation_csv(ctx.create(files::CORRELATION)?, &corr, &prov)?;

    let attributes: Vec<(String, Vec<Option<bool>>)> =
        a.attributes.iter().map(|n| (n.clone(), targets.column(n))).collect();
    let leakage = measure_leakage(&data, &attributes, &a.strip_columns, &ctx.cfg.protocol(seed), &a.leakage)?;
    let mut w = ctx.create(files::LEAKAGE)?;
    fvkit_audit::io::write_leakage_json(&mut w, &leakage, &prov)?;
    w.flush()?;

    let comp = composition(&assignments, k, &attributes, a.lift_factor)?;
    fvkit_audit::io::write_composition_csv(ctx.create(files::COMPOSITION)?, &comp, &prov)?;
    for f in [files::CORRELATION, files::LEAKAGE, files::COMPOSITION] {
        io.outputs.push(ctx.path(f));
    }
    Ok(io)
}
