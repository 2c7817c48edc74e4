//! Cluster-by-attribute rates and lifts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_LIFT: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionCell {
    pub cluster: usize,
    pub attribute: String,
    /// Accounts with a known value in this cluster.
    pub n: usize,
    pub rate: Option<f64>,
    pub lift: Option<f64>,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub k: usize,
    pub lift_factor: f64,
    /// Rate over all accounts with a known value, per attribute.
    pub population: Vec<(String, Option<f64>)>,
    pub cells: Vec<CompositionCell>,
}

/// Rates of binary attributes per cluster. Missing values are left out of
/// both numerator and denominator.
pub fn composition(
    assignments: &[usize],
    k: usize,
    attributes: &[(String, Vec<Option<bool>>)],
    lift_factor: f64,
) -> Result<CompositionReport> {
    if !(lift_factor > 0.0) {
        return Err(Error::Config(format!("lift factor {lift_factor} must be positive")));
    }
    if let Some(&a) = assignments.iter().find(|&&a| a >= k) {
        return Err(Error::Input(format!("assignment {a} outside 0..{k}")));
    }
    let mut population = Vec::new();
    let mut cells = Vec::new();
    for (name, values) in attributes {
        if values.len() != assignments.len() {
            return Err(Error::Input(format!("attribute {name} has {} values", values.len())));
        }
        let mut pos = vec![0usize; k];
        let mut known = vec![0usize; k];
        for (&c, v) in assignments.iter().zip(values) {
            if let Some(v) = v {
                known[c] += 1;
                pos[c] += usize::from(*v);
            }
        }
        let total_known: usize = known.iter().sum();
        let pop = (total_known > 0).then(|| pos.iter().sum::<usize>() as f64 / total_known as f64);
        population.push((name.clone(), pop));
        for c in 0..k {
            let rate = (known[c] > 0).then(|| pos[c] as f64 / known[c] as f64);
            let lift = match (rate, pop) {
                (Some(r), Some(p)) if p > 0.0 => Some(r / p),
                _ => None,
            };
            cells.push(CompositionCell {
                cluster: c,
                attribute: name.clone(),
                n: known[c],
                rate,
                lift,
                flagged: lift.is_some_and(|l| l >= lift_factor),
            });
        }
    }
    Ok(CompositionReport { k, lift_factor, population, cells })
}
