//! The full segmentation pass: impute, standardise, reduce, cluster,
//! embed.

use serde::{Deserialize, Serialize};

use fvkit_core::rng;

use crate::error::{Error, Result};
use crate::kmeans::{ClusterModel, KMeansConfig};
use crate::pca::{fit_pca, Components, PcaModel};
use crate::points::Points;
use crate::silhouette::{select_k, Selection};
use crate::tsne::{tsne_embed, TsneConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    /// Clustering columns; `None` uses every feature column.
    pub columns: Option<Vec<String>>,
    pub variance_target: f64,
    /// Overrides `variance_target` when set.
    pub n_components: Option<usize>,
    pub k_min: usize,
    pub k_max: usize,
    /// Overrides the silhouette recommendation when set.
    pub k: Option<usize>,
    pub kmeans: KMeansConfig,
    pub embed: bool,
    pub tsne: TsneConfig,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            columns: None,
            variance_target: 0.8,
            n_components: None,
            k_min: 2,
            k_max: 12,
            k: None,
            kmeans: KMeansConfig::default(),
            embed: true,
            tsne: TsneConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SegmentResult {
    pub columns: Vec<String>,
    pub pca: PcaModel,
    pub selection: Selection,
    pub k: usize,
    /// Assignments in input row order.
    pub assignments: Vec<usize>,
    pub model: ClusterModel,
    pub embedding: Option<Points>,
}

/// Column medians of the present values; all-missing columns get 0.
pub fn impute_median(rows: &[Vec<Option<f64>>], d: usize) -> Points {
    let mut medians = Vec::with_capacity(d);
    for j in 0..d {
        let mut v: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
        v.sort_by(f64::total_cmp);
        let m = match v.len() {
            0 => 0.0,
            n if n % 2 == 1 => v[n / 2],
            n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
        };
        medians.push(m);
    }
    let mut out = Points::zeros(rows.len(), d);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..d {
            out.row_mut(i)[j] = r[j].unwrap_or(medians[j]);
        }
    }
    out
}

/// Run the pass on named feature rows. Rows are put in a canonical order
/// first, so the output does not depend on the input order.
pub fn segment(names: &[String], rows: &[Vec<Option<f64>>], seed: u64, cfg: &SegmentConfig) -> Result<SegmentResult> {
    let selected: Vec<usize> = match &cfg.columns {
        None => (0..names.len()).collect(),
        Some(cols) => cols
            .iter()
            .map(|c| names.iter().position(|n| n == c).ok_or_else(|| Error::Config(format!("unknown column '{c}'"))))
            .collect::<Result<_>>()?,
    };
    let subset: Vec<Vec<Option<f64>>> = rows.iter().map(|r| selected.iter().map(|&j| r[j]).collect()).collect();
    let x = impute_median(&subset, selected.len());
    if x.n < 2 {
        return Err(Error::TooFewRows(x.n));
    }
    let order = x.sorted_order();
    let sorted = x.select(&order);
    let components = match cfg.n_components {
        Some(c) => Components::Count(c),
        None => Components::VarianceTarget(cfg.variance_target),
    };
    let pca = fit_pca(&sorted, components)?;
    let scores = pca.transform(&sorted);
    let selection = select_k(&scores, cfg.k_min..=cfg.k_max, rng::derive_seed(seed, "segment.kmeans"), &cfg.kmeans)?;
    let k = cfg.k.unwrap_or(selection.recommended);
    let model = match selection.model(k) {
        Some(m) => m.clone(),
        None => crate::kmeans::kmeans(&scores, k, rng::derive_seed(seed, "segment.kmeans"), &cfg.kmeans)?,
    };
    let mut assignments = vec![0; x.n];
    for (pos, &i) in order.iter().enumerate() {
        assignments[i] = model.assignments[pos];
    }
    let embedding = if cfg.embed {
        let e = tsne_embed(&scores, rng::derive_seed(seed, "segment.tsne"), &cfg.tsne)?;
        let mut out = Points::zeros(x.n, 2);
        for (pos, &i) in order.iter().enumerate() {
            out.row_mut(i).copy_from_slice(e.row(pos));
        }
        Some(out)
    } else {
        None
    };
    Ok(SegmentResult {
        columns: selected.iter().map(|&j| names[j].clone()).collect(),
        pca,
        selection,
        k,
        assignments,
        model,
        embedding,
    })
}
