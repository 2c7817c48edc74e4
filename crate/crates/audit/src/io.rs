//! Report files. Every file carries the configuration hash and seed.

use std::io::Write;

use serde::Serialize;

use crate::composition::CompositionReport;
use crate::correlation::{CorrelationReport, SIGNIFICANCE};
use crate::error::Result;
use crate::leakage::LeakageReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v}")).unwrap_or_default()
}

/// One row per unordered pair of distinct columns.
pub fn write_correlation_csv<W: Write>(w: W, report: &CorrelationReport, prov: &Provenance) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["x", "y", "r", "p", "n", "significant_at_0.001", "config_hash", "seed"])?;
    let k = report.names.len();
    for a in 0..k {
        for b in a + 1..k {
            let c = report.get(a, b);
            let sig = c.p.is_some_and(|p| p < SIGNIFICANCE);
            wtr.write_record([
                report.names[a].clone(),
                report.names[b].clone(),
                opt(c.r),
                opt(c.p),
                c.n.to_string(),
                u8::from(sig).to_string(),
                prov.config_hash.clone(),
                prov.seed.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_composition_csv<W: Write>(w: W, report: &CompositionReport, prov: &Provenance) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["cluster", "attribute", "n", "rate", "population_rate", "lift", "flagged", "config_hash", "seed"])?;
    for cell in &report.cells {
        let pop = report.population.iter().find(|p| p.0 == cell.attribute).and_then(|p| p.1);
        wtr.write_record([
            cell.cluster.to_string(),
            cell.attribute.clone(),
            cell.n.to_string(),
            opt(cell.rate),
            opt(pop),
            opt(cell.lift),
            u8::from(cell.flagged).to_string(),
            prov.config_hash.clone(),
            prov.seed.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Stamped<'a, T> {
    provenance: &'a Provenance,
    #[serde(flatten)]
    report: &'a T,
}

pub fn write_leakage_json<W: Write>(w: W, report: &LeakageReport, prov: &Provenance) -> Result<()> {
    serde_json::to_writer_pretty(w, &Stamped { provenance: prov, report })?;
    Ok(())
}
