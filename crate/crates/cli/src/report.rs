//! Report bundle assembled from the stage files. Missing stages appear as
//! gaps rather than errors.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, Result};
use serde_json::{json, Map, Value};

use crate::config::target_names;
use crate::stages::{files, Ctx, Io};

const METRIC_COLUMNS: [&str; 9] = ["accuracy", "precision", "recall", "f1", "auroc", "tp", "fp", "tn", "fn"];

fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

/// A CSV cell as a JSON number, or null when empty.
fn number(cell: &str) -> Result<Value> {
    if cell.is_empty() {
        return Ok(Value::Null);
    }
    if let Ok(i) = cell.parse::<i64>() {
        return Ok(json!(i));
    }
    let f: f64 = cell.parse().map_err(|_| anyhow!("non-numeric cell '{cell}'"))?;
    Ok(json!(f))
}

fn col(header: &[String], name: &str) -> Result<usize> {
    header.iter().position(|h| h == name).ok_or_else(|| anyhow!("column '{name}' missing"))
}

struct Bundle<'a> {
    ctx: &'a Ctx<'a>,
    io: Io,
    gaps: Vec<Value>,
}

impl Bundle<'_> {
    /// The file when present; otherwise a gap naming the stage to run.
    fn source(&mut self, stage: &str, rel: &str) -> Option<std::path::PathBuf> {
        let p = self.ctx.path(rel);
        if p.is_file() {
            self.io.inputs.push(p.clone());
            Some(p)
        } else {
            self.gaps.push(json!({ "stage": stage, "missing": rel }));
            None
        }
    }

    fn write_csv(&mut self, rel: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let p = self.ctx.path(rel);
        std::fs::create_dir_all(p.parent().expect("report files live in a directory"))?;
        let mut wtr = csv::Writer::from_path(&p)?;
        wtr.write_record(header)?;
        for r in rows {
            wtr.write_record(r)?;
        }
        wtr.flush()?;
        self.io.outputs.push(p);
        Ok(())
    }
}

fn metric_grid(b: &mut Bundle) -> Result<Value> {
    let Some(p) = b.source("train", files::METRICS) else {
        return Ok(Value::Array(Vec::new()));
    };
    let (header, rows) = read_csv(&p)?;
    let target = col(&header, "target")?;
    let model = col(&header, "model")?;
    let status = col(&header, "status")?;
    let idx: Vec<usize> = METRIC_COLUMNS.iter().map(|c| col(&header, c)).collect::<Result<_>>()?;

    let mut out_header = vec!["target".to_string(), "model".into(), "status".into()];
    out_header.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    let mut out_rows = Vec::new();
    let mut entries = Vec::new();
    for name in target_names() {
        for kind in &b.ctx.cfg.learn.models {
            let kind = kind.to_string();
            let row = rows.iter().find(|r| r[target] == name && r[model] == kind);
            let mut rec = vec![name.clone(), kind.clone()];
            let mut entry = Map::new();
            entry.insert("target".into(), json!(name));
            entry.insert("model".into(), json!(kind));
            match row {
                Some(r) => {
                    rec.push(r[status].clone());
                    entry.insert("status".into(), json!(r[status]));
                    for (c, &i) in METRIC_COLUMNS.iter().zip(&idx) {
                        rec.push(r[i].clone());
                        entry.insert(c.to_string(), number(&r[i])?);
                    }
                }
                None => {
                    rec.push("missing".into());
                    entry.insert("status".into(), json!("missing"));
                    for c in METRIC_COLUMNS {
                        rec.push(String::new());
                        entry.insert(c.to_string(), Value::Null);
                    }
                    b.gaps.push(json!({ "stage": "train", "missing": format!("{name} {kind}") }));
                }
            }
            out_rows.push(rec);
            entries.push(Value::Object(entry));
        }
    }
    b.write_csv(files::REPORT_METRICS, &out_header, &out_rows)?;
    Ok(Value::Array(entries))
}

fn top_importances(b: &mut Bundle) -> Result<Value> {
    let Some(p) = b.source("train", files::IMPORTANCES) else {
        return Ok(Value::Object(Map::new()));
    };
    let (header, rows) = read_csv(&p)?;
    let [target, model, feature, mean, sd] =
        ["target", "model", "feature", "mean", "sd"].map(|c| col(&header, c));
    let (target, model, feature, mean, sd) = (target?, model?, feature?, mean?, sd?);
    let kind = b.ctx.cfg.report.importance_model.to_string();
    let top = b.ctx.cfg.report.top_importances;

    let out_header: Vec<String> = ["target", "model", "rank", "feature", "mean", "sd"].map(String::from).to_vec();
    let mut out_rows = Vec::new();
    let mut map = Map::new();
    for name in target_names() {
        let mut picked: Vec<&Vec<String>> = rows.iter().filter(|r| r[target] == name && r[model] == kind).collect();
        if picked.is_empty() {
            continue;
        }
        let value = |r: &Vec<String>| r[mean].parse::<f64>().unwrap_or(f64::NEG_INFINITY);
        picked.sort_by(|x, y| value(y).total_cmp(&value(x)).then_with(|| x[feature].cmp(&y[feature])));
        picked.truncate(top);
        let mut list = Vec::new();
        for (rank, r) in picked.iter().enumerate() {
            out_rows.push(vec![
                name.clone(),
                kind.clone(),
                (rank + 1).to_string(),
                r[feature].clone(),
                r[mean].clone(),
                r[sd].clone(),
            ]);
            list.push(json!({ "feature": r[feature], "mean": number(&r[mean])?, "sd": number(&r[sd])? }));
        }
        map.insert(name, Value::Array(list));
    }
    b.write_csv(files::REPORT_IMPORTANCES, &out_header, &out_rows)?;
    Ok(Value::Object(map))
}

fn cluster_profile(b: &mut Bundle) -> Result<Value> {
    let Some(p) = b.source("cluster", files::PROFILE) else {
        return Ok(Value::Null);
    };
    let (header, rows) = read_csv(&p)?;
    let k = header.iter().filter(|h| h.starts_with("cluster_")).count();
    let min_i = col(&header, "min_cluster")?;
    let max_i = col(&header, "max_cluster")?;

    let mut out_header = header.clone();
    out_header.extend(["is_min".to_string(), "is_max".to_string()]);
    let mut out_rows = Vec::new();
    let mut shares = Value::Null;
    let mut features = Vec::new();
    for r in &rows {
        let means: Vec<Value> = r[1..=k].iter().map(|c| number(c)).collect::<Result<_>>()?;
        if r[0] == "size_share" {
            shares = Value::Array(means);
            let mut rec = r.clone();
            rec.extend([String::new(), String::new()]);
            out_rows.push(rec);
            continue;
        }
        let flags = |i: usize| -> String {
            (0..k).map(|c| if r[i] == c.to_string() { "1" } else { "0" }).collect::<Vec<_>>().join(";")
        };
        let mut rec = r.clone();
        rec.push(flags(min_i));
        rec.push(flags(max_i));
        out_rows.push(rec);
        features.push(json!({
            "feature": r[0],
            "means": means,
            "min_cluster": number(&r[min_i])?,
            "max_cluster": number(&r[max_i])?,
        }));
    }
    b.write_csv(files::REPORT_PROFILE, &out_header, &out_rows)?;
    Ok(json!({ "k": k, "size_share": shares, "features": features }))
}

fn leakage_summary(b: &mut Bundle) -> Result<Value> {
    let Some(p) = b.source("audit", files::LEAKAGE) else {
        return Ok(Value::Array(Vec::new()));
    };
    let doc: Value = serde_json::from_reader(BufReader::new(File::open(&p)?))?;
    let header: Vec<String> =
        ["attribute", "auroc_all", "best_all", "auroc_stripped", "best_stripped", "verdict", "ordering_holds"]
            .map(String::from)
            .to_vec();
    let mut rows = Vec::new();
    let mut list = Vec::new();
    let cell = |v: &Value| match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    for a in doc["attributes"].as_array().cloned().unwrap_or_default() {
        let entry = json!({
            "attribute": a["attribute"],
            "auroc_all": a["all"]["auroc"],
            "best_all": a["all"]["best_kind"],
            "auroc_stripped": a["stripped"]["auroc"],
            "best_stripped": a["stripped"]["best_kind"],
            "verdict": a["verdict"],
            "ordering_holds": a["ordering_holds"],
        });
        rows.push(header.iter().map(|h| cell(&entry[h.as_str()])).collect());
        list.push(entry);
    }
    b.write_csv(files::REPORT_LEAKAGE, &header, &rows)?;
    Ok(json!({
        "attributes": list,
        "skipped": doc["skipped"],
        "stripped_columns": doc["stripped_columns"],
        "thresholds": doc["thresholds"],
    }))
}

pub fn report(ctx: &Ctx) -> Result<Io> {
    let dir = ctx.path("report");
    if dir.exists() {
        std::fs::remove_dir_all(&dir)?;
    }
    let mut b = Bundle { ctx, io: Io::default(), gaps: Vec::new() };
    let metrics = metric_grid(&mut b)?;
    let importances = top_importances(&mut b)?;
    let profile = cluster_profile(&mut b)?;
    let leakage = leakage_summary(&mut b)?;
    let doc = json!({
        "config_hash": ctx.config_hash,
        "seed": ctx.cfg.seed,
        "metric_grid": metrics,
        "top_importances": importances,
        "cluster_profile": profile,
        "leakage": leakage,
        "gaps": b.gaps,
    });
    let p = ctx.path(files::REPORT_JSON);
    std::fs::create_dir_all(p.parent().expect("report files live in a directory"))?;
    let mut f = std::io::BufWriter::new(File::create(&p)?);
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;
    f.flush()?;
    b.io.outputs.push(p);
    Ok(b.io)
}
