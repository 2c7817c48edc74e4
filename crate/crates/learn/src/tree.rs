//! Binned training data and the two tree growers: Gini classification
//! trees for forests and second-order regression trees for boosting.
//!
//! Bin edges are actual training values and a split sends `x <= edge`
//! left, so a tree depends on each feature only through the order of its
//! values.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Matrix;

pub const MAX_BINS: usize = 255;

/// Column-major bin indices plus the upper edge of every bin.
#[derive(Debug, Clone)]
pub struct BinnedData {
    pub n_rows: usize,
    pub columns: Vec<Vec<u8>>,
    pub edges: Vec<Vec<f64>>,
}

fn bin_edges(mut values: Vec<f64>, max_bins: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut unique = values.clone();
    unique.dedup();
    if unique.len() <= max_bins {
        return unique;
    }
    let n = values.len();
    let mut edges: Vec<f64> = Vec::with_capacity(max_bins);
    for k in 1..=max_bins {
        let v = values[(k * n).div_ceil(max_bins) - 1];
        if edges.last() != Some(&v) {
            edges.push(v);
        }
    }
    edges
}

impl BinnedData {
    pub fn new(x: &Matrix, max_bins: usize) -> BinnedData {
        assert!((2..=256).contains(&max_bins), "bins must fit in a byte");
        let mut columns = Vec::with_capacity(x.n_cols);
        let mut edges = Vec::with_capacity(x.n_cols);
        for j in 0..x.n_cols {
            let col = x.column(j);
            let e = bin_edges(col.clone(), max_bins);
            let bins = col.iter().map(|&v| e.partition_point(|&edge| edge < v).min(e.len() - 1) as u8).collect();
            columns.push(bins);
            edges.push(e);
        }
        BinnedData { n_rows: x.n_rows, columns, edges }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Split { feature: usize, threshold: f64, gain: f64, left: u32, right: u32 },
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Split { feature, threshold, left, right, .. } => {
                    k = if row[feature] <= threshold { left as usize } else { right as usize };
                }
                Node::Leaf { value } => return value,
            }
        }
    }

    /// Summed split gain per feature.
    pub fn gain_by_feature(&self, n_features: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_features];
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                out[*feature] += gain;
            }
        }
        out
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], k: usize) -> usize {
            match nodes[k] {
                Node::Split { left, right, .. } => 1 + walk(nodes, left as usize).max(walk(nodes, right as usize)),
                Node::Leaf { .. } => 0,
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Move rows whose bin is at most `bin` to the front; returns their count.
fn partition_rows(rows: &mut [u32], col: &[u8], bin: u8) -> usize {
    let mut left = 0;
    for i in 0..rows.len() {
        if col[rows[i] as usize] <= bin {
            rows.swap(left, i);
            left += 1;
        }
    }
    left
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    feature: usize,
    bin: u8,
    gain: f64,
}

fn better(best: &Option<Candidate>, gain: f64) -> bool {
    gain > 1e-12 && best.is_none_or(|b| gain > b.gain)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiniParams {
    pub max_depth: Option<usize>,
    pub mtry: usize,
}

/// Grow a Gini tree on rows with positive bootstrap weight. Features are
/// scanned in ascending order and thresholds from low to high, and only a
/// strictly better gain replaces the incumbent, so ties go to the lowest
/// feature index and then the lowest threshold.
pub fn grow_gini_tree<R: Rng>(
    data: &BinnedData,
    y: &[bool],
    weights: &[u32],
    params: GiniParams,
    rng: &mut R,
) -> Tree {
    let p = data.n_features();
    let mut rows: Vec<u32> = (0..data.n_rows as u32).filter(|&r| weights[r as usize] > 0).collect();
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut stack = vec![(0usize, 0usize, rows.len(), 0usize)];
    let mut features: Vec<usize> = (0..p).collect();
    let mut hist_w = vec![0f64; 256];
    let mut hist_pos = vec![0f64; 256];
    let mut scratch: Vec<(u8, f64, f64)> = Vec::new();
    let mtry = params.mtry.clamp(1, p.max(1));

    while let Some((node, start, end, depth)) = stack.pop() {
        let slice = &rows[start..end];
        let (mut w, mut wp) = (0.0, 0.0);
        for &r in slice {
            let rw = f64::from(weights[r as usize]);
            w += rw;
            if y[r as usize] {
                wp += rw;
            }
        }
        let leaf = Node::Leaf { value: wp / w };
        let pure = wp == 0.0 || wp == w;
        if pure || params.max_depth.is_some_and(|d| depth >= d) || slice.len() < 2 || p == 0 {
            nodes[node] = leaf;
            continue;
        }
        let parent_score = (wp * wp + (w - wp) * (w - wp)) / w;
        let score = |lw: f64, lp: f64| {
            let rw = w - lw;
            let rp = wp - lp;
            (lp * lp + (lw - lp) * (lw - lp)) / lw + (rp * rp + (rw - rp) * (rw - rp)) / rw - parent_score
        };

        // partial Fisher-Yates for the feature subset
        for i in 0..mtry {
            let j = rng.random_range(i..p);
            features.swap(i, j);
        }
        let mut chosen = features[..mtry].to_vec();
        chosen.sort_unstable();

        let mut best: Option<Candidate> = None;
        for &f in &chosen {
            let col = &data.columns[f];
            let nb = data.edges[f].len();
            if nb < 2 {
                continue;
            }
            if slice.len() * 2 < nb {
                scratch.clear();
                for &r in slice {
                    let rw = f64::from(weights[r as usize]);
                    scratch.push((col[r as usize], rw, if y[r as usize] { rw } else { 0.0 }));
                }
                scratch.sort_unstable_by_key(|e| e.0);
                let (mut lw, mut lp) = (0.0, 0.0);
                let mut i = 0;
                while i < scratch.len() {
                    let b = scratch[i].0;
                    while i < scratch.len() && scratch[i].0 == b {
                        lw += scratch[i].1;
                        lp += scratch[i].2;
                        i += 1;
                    }
                    if i == scratch.len() {
                        break;
                    }
                    let gain = score(lw, lp);
                    if better(&best, gain) {
                        best = Some(Candidate { feature: f, bin: b, gain });
                    }
                }
            } else {
                hist_w[..nb].fill(0.0);
                hist_pos[..nb].fill(0.0);
                for &r in slice {
                    let b = col[r as usize] as usize;
                    let rw = f64::from(weights[r as usize]);
                    hist_w[b] += rw;
                    if y[r as usize] {
                        hist_pos[b] += rw;
                    }
                }
                let (mut lw, mut lp) = (0.0, 0.0);
                for b in 0..nb - 1 {
                    if hist_w[b] == 0.0 {
                        continue;
                    }
                    lw += hist_w[b];
                    lp += hist_pos[b];
                    if lw >= w {
                        break;
                    }
                    let gain = score(lw, lp);
                    if better(&best, gain) {
                        best = Some(Candidate { feature: f, bin: b as u8, gain });
                    }
                }
            }
        }
        let Some(c) = best else {
            nodes[node] = leaf;
            continue;
        };
        let n_left = partition_rows(&mut rows[start..end], &data.columns[c.feature], c.bin);
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[node] = Node::Split {
            feature: c.feature,
            threshold: data.edges[c.feature][c.bin as usize],
            gain: c.gain,
            left: left as u32,
            right: left as u32 + 1,
        };
        stack.push((left + 1, start + n_left, end, depth + 1));
        stack.push((left, start, start + n_left, depth + 1));
    }
    Tree { nodes }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostTreeParams {
    pub max_depth: usize,
    pub lambda: f64,
    pub min_child_weight: f64,
}

/// Leaves of a freshly grown boosting tree: node index and the rows that
/// reach it.
pub struct LeafRows {
    pub node: usize,
    pub rows: Vec<u32>,
}

/// Grow a regression tree on gradient and hessian statistics. The gain
/// of a split is `GL²/(HL+λ) + GR²/(HR+λ) − G²/(H+λ)`; leaves hold the
/// Newton value `−G/(H+λ)`.
pub fn grow_boost_tree(
    data: &BinnedData,
    grad: &[f64],
    hess: &[f64],
    params: BoostTreeParams,
) -> (Tree, Vec<LeafRows>) {
    let p = data.n_features();
    let mut offsets = Vec::with_capacity(p + 1);
    offsets.push(0usize);
    for e in &data.edges {
        offsets.push(offsets.last().unwrap() + e.len());
    }
    let total_bins = offsets[p];
    let lambda = params.lambda;

    let build = |rows: &[u32], out: &mut Vec<[f64; 2]>| {
        out.clear();
        out.resize(total_bins, [0.0; 2]);
        for f in 0..p {
            let col = &data.columns[f];
            let hist = &mut out[offsets[f]..offsets[f + 1]];
            for &r in rows {
                let e = &mut hist[col[r as usize] as usize];
                e[0] += grad[r as usize];
                e[1] += hess[r as usize];
            }
        }
    };

    let mut rows: Vec<u32> = (0..data.n_rows as u32).collect();
    let mut nodes = vec![Node::Leaf { value: 0.0 }];
    let mut leaves = Vec::new();
    let mut root_hist = Vec::new();
    build(&rows, &mut root_hist);
    let (g0, h0) = rows.iter().fold((0.0, 0.0), |(g, h), &r| (g + grad[r as usize], h + hess[r as usize]));
    let mut stack = vec![(0usize, 0usize, rows.len(), 0usize, root_hist, g0, h0)];
    while let Some((node, start, end, depth, hist, g, h)) = stack.pop() {
        let leaf_value = -g / (h + lambda);
        let mut best: Option<Candidate> = None;
        let mut best_left = (0.0, 0.0);
        if depth < params.max_depth && end - start >= 2 {
            let parent = g * g / (h + lambda);
            for f in 0..p {
                let bins = &hist[offsets[f]..offsets[f + 1]];
                let (mut gl, mut hl) = (0.0, 0.0);
                for (b, e) in bins.iter().enumerate().take(bins.len().saturating_sub(1)) {
                    gl += e[0];
                    hl += e[1];
                    let (gr, hr) = (g - gl, h - hl);
                    if hl < params.min_child_weight || hr < params.min_child_weight {
                        continue;
                    }
                    let gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent;
                    if better(&best, gain) {
                        best = Some(Candidate { feature: f, bin: b as u8, gain });
                        best_left = (gl, hl);
                    }
                }
            }
        }
        let Some(c) = best else {
            nodes[node] = Node::Leaf { value: leaf_value };
            leaves.push(LeafRows { node, rows: rows[start..end].to_vec() });
            continue;
        };
        let n_left = partition_rows(&mut rows[start..end], &data.columns[c.feature], c.bin);
        let left = nodes.len();
        nodes.push(Node::Leaf { value: 0.0 });
        nodes.push(Node::Leaf { value: 0.0 });
        nodes[node] = Node::Split {
            feature: c.feature,
            threshold: data.edges[c.feature][c.bin as usize],
            gain: c.gain,
            left: left as u32,
            right: left as u32 + 1,
        };
        let (gl, hl) = best_left;
        let (l_range, r_range) = ((start, start + n_left), (start + n_left, end));
        if depth + 1 < params.max_depth {
            // build the smaller child, derive the other by subtraction
            let small_is_left = n_left * 2 <= end - start;
            let small = if small_is_left { l_range } else { r_range };
            let mut small_hist = Vec::new();
            build(&rows[small.0..small.1], &mut small_hist);
            let mut big_hist = hist;
            for (b, s) in big_hist.iter_mut().zip(&small_hist) {
                b[0] -= s[0];
                b[1] -= s[1];
            }
            let (lh, rh) = if small_is_left { (small_hist, big_hist) } else { (big_hist, small_hist) };
            stack.push((left + 1, r_range.0, r_range.1, depth + 1, rh, g - gl, h - hl));
            stack.push((left, l_range.0, l_range.1, depth + 1, lh, gl, hl));
        } else {
            // children will be leaves; no histograms needed
            stack.push((left + 1, r_range.0, r_range.1, depth + 1, Vec::new(), g - gl, h - hl));
            stack.push((left, l_range.0, l_range.1, depth + 1, Vec::new(), gl, hl));
        }
    }
    (Tree { nodes }, leaves)
}

/// Bootstrap multiplicities for `n` rows.
pub fn bootstrap_weights<R: Rng>(n: usize, rng: &mut R) -> Vec<u32> {
    let mut w = vec![0u32; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edges_are_training_values() {
        let e = bin_edges(vec![3.0, 1.0, 2.0, 2.0], 255);
        assert_eq!(e, vec![1.0, 2.0, 3.0]);
        let many: Vec<f64> = (0..1000).map(f64::from).collect();
        let e = bin_edges(many, 10);
        assert_eq!(e.len(), 10);
        assert_eq!(*e.last().unwrap(), 999.0);
        assert!(e.iter().all(|v| v.fract() == 0.0));
    }

    #[test]
    fn gini_tree_finds_the_informative_feature() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 2) as f64]).collect();
        let y: Vec<bool> = (0..40).map(|i| i % 2 == 1).collect();
        let data = BinnedData::new(&Matrix::from_rows(&rows), 255);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = grow_gini_tree(&data, &y, &vec![1; 40], GiniParams { max_depth: None, mtry: 2 }, &mut rng);
        assert_eq!(tree.depth(), 1);
        let gains = tree.gain_by_feature(2);
        assert_eq!(gains[0], 0.0);
        assert!(gains[1] > 0.0);
    }

    #[test]
    fn boost_tree_leaf_is_newton_step() {
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let data = BinnedData::new(&Matrix::from_rows(&rows), 255);
        let grad = [-0.5, -0.5, 0.5, 0.5];
        let hess = [0.25; 4];
        let params = BoostTreeParams { max_depth: 1, lambda: 1.0, min_child_weight: 0.0 };
        let (tree, leaves) = grow_boost_tree(&data, &grad, &hess, params);
        assert_eq!(leaves.len(), 2);
        assert_eq!(tree.predict(&[0.0]), 1.0 / 1.5);
        assert_eq!(tree.predict(&[3.0]), -1.0 / 1.5);
    }
}
