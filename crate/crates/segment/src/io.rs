//! CSV exports.

use std::io::Write;

use crate::error::Result;
use crate::points::Points;
use crate::profile::{ClusterProfile, RadarRow};
use crate::silhouette::{KDiagnostic, WEAK_STRUCTURE};

fn num(v: f64) -> String {
    format!("{v}")
}

pub fn write_clusters_csv<W: Write>(w: W, ids: &[String], assignments: &[usize]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["account_id", "cluster"])?;
    for (id, c) in ids.iter().zip(assignments) {
        wtr.write_record([id.as_str(), &c.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_diagnostics_csv<W: Write>(w: W, rows: &[KDiagnostic], recommended: usize) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["k", "inertia", "silhouette", "weak_structure", "recommended"])?;
    for d in rows {
        wtr.write_record([
            d.k.to_string(),
            num(d.inertia),
            num(d.silhouette),
            u8::from(d.silhouette < WEAK_STRUCTURE).to_string(),
            u8::from(d.k == recommended).to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// One row per profiled column with a mean per cluster, led by the size
/// shares.
pub fn write_profile_csv<W: Write>(w: W, profile: &ClusterProfile) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["feature".to_string()];
    header.extend((0..profile.k).map(|c| format!("cluster_{c}")));
    header.extend(["min_cluster".to_string(), "max_cluster".to_string()]);
    wtr.write_record(&header)?;
    let mut shares = vec!["size_share".to_string()];
    shares.extend(profile.shares.iter().map(|&s| num(s)));
    shares.extend([String::new(), String::new()]);
    wtr.write_record(&shares)?;
    for row in &profile.rows {
        let mut rec = vec![row.name.clone()];
        rec.extend(row.means.iter().map(|m| m.map(num).unwrap_or_default()));
        rec.push(row.min_cluster.map(|c| c.to_string()).unwrap_or_default());
        rec.push(row.max_cluster.map(|c| c.to_string()).unwrap_or_default());
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_embedding_csv<W: Write>(w: W, ids: &[String], embedding: &Points) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["account_id", "x", "y"])?;
    for (i, id) in ids.iter().enumerate() {
        let r = embedding.row(i);
        wtr.write_record([id.clone(), num(r[0]), num(r[1])])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_radar_csv<W: Write>(w: W, a: usize, b: usize, rows: &[RadarRow]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["feature".to_string(), format!("cluster_{a}"), format!("cluster_{b}")])?;
    for r in rows {
        wtr.write_record([r.name.clone(), num(r.a), num(r.b)])?;
    }
    wtr.flush()?;
    Ok(())
}
