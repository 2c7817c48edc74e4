use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fvkit_cli::config::PipelineConfig;
use fvkit_cli::manifest::Manifest;
use fvkit_cli::stages::files;
use tempfile::TempDir;

fn small_config(stage_dir: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::defaults();
    cfg.paths.stage_dir = stage_dir.to_string_lossy().into_owned();
    cfg.synth.n_accounts = 150;
    cfg.learn.cv_folds = 3;
    cfg.learn.grid.rf_trees = 10;
    cfg.learn.grid.gbt_trees = 10;
    cfg.learn.grid.lr_lambda = vec![0.1];
    cfg.segment.k_max = 6;
    cfg.segment.kmeans.restarts = 3;
    cfg.segment.tsne.iterations = 250;
    cfg
}

struct Workspace {
    _tmp: TempDir,
    root: PathBuf,
    config: PathBuf,
    out: PathBuf,
}

fn workspace() -> Workspace {
    let tmp = TempDir::new().unwrap();
    let root = tmp.path().to_path_buf();
    let out = root.join("out");
    let config = root.join("fvkit.toml");
    fs::write(&config, small_config(Path::new("out")).to_toml().unwrap()).unwrap();
    Workspace { _tmp: tmp, root, config, out }
}

fn fvkit(ws: &Workspace, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fvkit"))
        .args(args)
        .arg("--config")
        .arg(&ws.config)
        .current_dir(&ws.root)
        .env("FVKIT_LOG", "error")
        .env_remove("FVKIT_SEED")
        .env_remove("FVKIT_STAGE_DIR")
        .env_remove("FVKIT_CONFIG")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(out.status.success(), "failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn manifest(dir: &Path) -> Manifest {
    serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn default_config_round_trips() {
    let cfg = PipelineConfig::defaults();
    let text = cfg.to_toml().unwrap();
    let back = PipelineConfig::parse(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_toml().unwrap(), text);

    let mut custom = small_config(Path::new("elsewhere"));
    custom.learn.train_window = Some(8090);
    custom.segment.k = Some(4);
    custom.segment.columns = Some(vec!["balance_mean".into(), "income_total".into()]);
    custom.segment.tsne.perplexity = Some(12.5);
    let back = PipelineConfig::parse(&custom.to_toml().unwrap()).unwrap();
    assert_eq!(back, custom);
    assert_ne!(back.hash(), cfg.hash());
}

#[test]
fn config_init_prints_parseable_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_fvkit")).args(["config", "init"]).output().unwrap();
    ok(&out);
    let cfg = PipelineConfig::parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg, PipelineConfig::defaults());
}

#[test]
fn validation_lists_every_violation() {
    let ws = workspace();
    let mut cfg = small_config(Path::new("out"));
    cfg.synth.planted_proxy_strength = 1.5;
    cfg.learn.cv_folds = 1;
    cfg.segment.k_max = 20;
    cfg.audit.strip_columns.push("no_such_column".into());
    fs::write(&ws.config, cfg.to_toml().unwrap()).unwrap();
    assert_eq!(cfg.violations().len(), 4);

    let out = fvkit(&ws, &["features"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    for needle in ["planted_proxy_strength", "cv_folds", "2..=12", "no_such_column", "4 violation"] {
        assert!(err.contains(needle), "missing '{needle}' in: {err}");
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let ws = workspace();
    let mut text = fs::read_to_string(&ws.config).unwrap();
    text.push_str("\n[extra]\nvalue = 1\n");
    fs::write(&ws.config, text).unwrap();
    assert_eq!(fvkit(&ws, &["synth"]).status.code(), Some(1));
}

#[test]
fn train_before_features_names_the_missing_artifact() {
    let ws = workspace();
    let out = fvkit(&ws, &["train"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("features artifact missing"), "{err}");

    let out = fvkit(&ws, &["ingest"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("synth artifact missing"));
}

#[test]
fn locked_directory_is_refused() {
    let ws = workspace();
    fs::create_dir_all(&ws.out).unwrap();
    fs::write(ws.out.join(fvkit_cli::lock::LOCK_FILE), "1").unwrap();
    let out = fvkit(&ws, &["synth"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("locked"));
    fs::remove_file(ws.out.join(fvkit_cli::lock::LOCK_FILE)).unwrap();
    ok(&fvkit(&ws, &["synth"]));
    assert!(!ws.out.join(fvkit_cli::lock::LOCK_FILE).exists());
}

#[test]
fn run_all_is_deterministic_and_stages_are_isolated() {
    let a = workspace();
    let b = workspace();
    ok(&fvkit(&a, &["run-all"]));
    ok(&fvkit(&b, &["run-all", "--jobs", "1"]));
    let ma = manifest(&a.out);
    let mb = manifest(&b.out);
    assert_eq!(ma.digest, mb.digest);
    assert_eq!(ma.digest, ma.compute_digest());
    assert_eq!(ma.stages.len(), 8);
    for stage in ma.stages.values() {
        assert!(!stage.outputs.is_empty());
    }
    assert_eq!(fs::read(a.out.join(files::REPORT_JSON)).unwrap(), fs::read(b.out.join(files::REPORT_JSON)).unwrap());

    // Deleting an artifact and rerunning its stage reproduces it exactly.
    for (stage, file) in [
        ("features", files::FEATURES),
        ("label", files::LABELS),
        ("train", files::METRICS),
        ("cluster", files::CLUSTERS),
        ("audit", files::LEAKAGE),
    ] {
        let before = fs::read(a.out.join(file)).unwrap();
        fs::remove_file(a.out.join(file)).unwrap();
        ok(&fvkit(&a, &[stage]));
        assert_eq!(fs::read(a.out.join(file)).unwrap(), before, "{stage} output changed");
    }
    assert_eq!(manifest(&a.out).digest, ma.digest);

    // Report regeneration is byte-identical.
    let bundle: Vec<Vec<u8>> = [
        files::REPORT_JSON,
        files::REPORT_METRICS,
        files::REPORT_IMPORTANCES,
        files::REPORT_PROFILE,
        files::REPORT_LEAKAGE,
    ]
    .iter()
    .map(|f| fs::read(a.out.join(f)).unwrap())
    .collect();
    ok(&fvkit(&a, &["report"]));
    for (f, bytes) in
        [files::REPORT_JSON, files::REPORT_METRICS, files::REPORT_IMPORTANCES, files::REPORT_PROFILE, files::REPORT_LEAKAGE]
            .iter()
            .zip(&bundle)
    {
        assert_eq!(&fs::read(a.out.join(f)).unwrap(), bytes, "{f} changed");
    }
}

#[test]
fn report_values_match_stage_files() {
    let ws = workspace();
    ok(&fvkit(&ws, &["run-all"]));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(ws.out.join(files::REPORT_JSON)).unwrap()).unwrap();

    let grid = report["metric_grid"].as_array().unwrap();
    assert_eq!(grid.len(), 14 * 3);
    let mut rdr = csv::Reader::from_path(ws.out.join(files::METRICS)).unwrap();
    let header = rdr.headers().unwrap().clone();
    let col = |n: &str| header.iter().position(|h| h == n).unwrap();
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let entry = grid
            .iter()
            .find(|e| e["target"] == rec[col("target")] && e["model"] == rec[col("model")])
            .unwrap();
        for m in ["accuracy", "precision", "recall", "f1", "auroc", "tp", "fp", "tn", "fn"] {
            let cell = &rec[col(m)];
            if cell.is_empty() {
                assert!(entry[m].is_null());
            } else {
                assert_eq!(entry[m].as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{m}");
            }
        }
    }

    for (_, list) in report["top_importances"].as_object().unwrap() {
        let means: Vec<f64> = list.as_array().unwrap().iter().map(|e| e["mean"].as_f64().unwrap()).collect();
        assert!(means.len() <= 8);
        assert!(means.windows(2).all(|w| w[0] >= w[1]));
    }
    let profile = &report["cluster_profile"];
    let k = profile["k"].as_u64().unwrap() as usize;
    for row in profile["features"].as_array().unwrap() {
        let means: Vec<Option<f64>> = row["means"].as_array().unwrap().iter().map(|v| v.as_f64()).collect();
        assert_eq!(means.len(), k);
        if let (Some(lo), Some(hi)) = (row["min_cluster"].as_u64(), row["max_cluster"].as_u64()) {
            let known: Vec<f64> = means.iter().flatten().copied().collect();
            assert_eq!(means[lo as usize].unwrap(), known.iter().copied().fold(f64::INFINITY, f64::min));
            assert_eq!(means[hi as usize].unwrap(), known.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
    }
    assert_eq!(report["leakage"]["attributes"].as_array().unwrap().len(), 4);
    assert!(report["gaps"].as_array().unwrap().is_empty());
}

#[test]
fn partial_pipeline_reports_gaps() {
    let ws = workspace();
    for stage in ["synth", "ingest", "features", "label", "report"] {
        ok(&fvkit(&ws, &[stage]));
    }
    let report: serde_json::Value = serde_json::from_slice(&fs::read(ws.out.join(files::REPORT_JSON)).unwrap()).unwrap();
    let stages: Vec<&str> = report["gaps"].as_array().unwrap().iter().map(|g| g["stage"].as_str().unwrap()).collect();
    for s in ["train", "cluster", "audit"] {
        assert!(stages.contains(&s), "{stages:?}");
    }
    let m = manifest(&ws.out);
    assert_eq!(m.stages.keys().map(String::as_str).collect::<Vec<_>>(), ["features", "ingest", "label", "report", "synth"]);
}

#[test]
fn seed_override_comes_from_environment() {
    let ws = workspace();
    let out = Command::new(env!("CARGO_BIN_EXE_fvkit"))
        .args(["synth", "--config"])
        .arg(&ws.config)
        .current_dir(&ws.root)
        .env("FVKIT_LOG", "error")
        .env("FVKIT_SEED", "11")
        .output()
        .unwrap();
    ok(&out);
    let m = manifest(&ws.out);
    assert_eq!(m.seed, 11);
    assert_eq!(m.stages["synth"].seed, Some(11));
}
