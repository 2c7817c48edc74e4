//! Pearson correlation with exact two-tailed p-values.

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

/// Significance threshold for the correlation report.
pub const SIGNIFICANCE: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pearson {
    /// `None` when either series is constant over the complete pairs or
    /// fewer than 3 pairs exist.
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
}

/// Two-tailed p-value of `r` under the t distribution with `n - 2`
/// degrees of freedom.
pub fn p_value(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    let r2 = r * r;
    if r2 >= 1.0 {
        return 0.0;
    }
    let t2 = r2 * df / (1.0 - r2);
    // P(|T| > t) = I_{df/(df+t²)}(df/2, 1/2)
    beta_reg(df / 2.0, 0.5, df / (df + t2)).clamp(0.0, 1.0)
}

/// Pearson r over the pairwise-complete observations.
pub fn pearson(x: &[Option<f64>], y: &[Option<f64>]) -> Pearson {
    assert_eq!(x.len(), y.len());
    let pairs: Vec<(f64, f64)> = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
    let n = pairs.len();
    if n < 3 {
        return Pearson { r: None, p: None, n };
    }
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Pearson { r: None, p: None, n };
    }
    // the product under one root keeps r(x, y) == r(y, x) bit for bit
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Pearson { r: Some(r), p: Some(p_value(r, n)), n }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub names: Vec<String>,
    /// Row-major, `names.len()` squared.
    pub cells: Vec<Pearson>,
}

impl CorrelationReport {
    pub fn get(&self, a: usize, b: usize) -> &Pearson {
        &self.cells[a * self.names.len() + b]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn by_name(&self, a: &str, b: &str) -> Option<&Pearson> {
        Some(self.get(self.index(a)?, self.index(b)?))
    }
}

/// All pairs of named columns. The diagonal is 1 for any non-constant
/// column.
pub fn correlation_matrix(columns: &[(String, Vec<Option<f64>>)]) -> CorrelationReport {
    let k = columns.len();
    let mut cells = vec![Pearson { r: None, p: None, n: 0 }; k * k];
    for a in 0..k {
        for b in a..k {
            let mut c = pearson(&columns[a].1, &columns[b].1);
            if a == b && c.r.is_some() {
                c.r = Some(1.0);
                c.p = Some(0.0);
            }
            cells[a * k + b] = c;
            cells[b * k + a] = c;
        }
    }
    CorrelationReport { names: columns.iter().map(|c| c.0.clone()).collect(), cells }
}
