//! Scalar formulas behind the temporal features.

/// Mean, population standard deviation and length of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStats {
    pub mean: f64,
    pub sd: f64,
    pub n: usize,
}

impl SeriesStats {
    /// `None` for an empty series. A constant series has `sd == 0` exactly.
    pub fn of(values: &[f64]) -> Option<SeriesStats> {
        let n = values.len();
        let first = *values.first()?;
        if values.iter().all(|&v| v == first) {
            return Some(SeriesStats { mean: first, sd: 0.0, n });
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        Some(SeriesStats { mean, sd: var.sqrt(), n })
    }

    /// Coefficient of variation; `None` when the mean is zero.
    pub fn cv(&self) -> Option<f64> {
        (self.mean != 0.0).then(|| self.sd / self.mean)
    }
}

/// Cosine similarity of two non-negative vectors, `None` if either is all zero.
pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na * nb).sqrt()).clamp(0.0, 1.0))
}

/// Mean cosine similarity over adjacent interval vectors.
///
/// Pairs where either vector is all zero are skipped; the average is taken
/// over the pairs that remain. Fewer than two vectors, or no usable pair,
/// gives `None`.
pub fn persistence<V: AsRef<[f64]>>(intervals: &[V]) -> Option<f64> {
    let (sum, pairs) = intervals
        .windows(2)
        .filter_map(|w| cosine(w[0].as_ref(), w[1].as_ref()))
        .fold((0.0, 0usize), |(s, n), c| (s + c, n + 1));
    (pairs > 0).then(|| sum / pairs as f64)
}

/// Burstiness `(r - 1) / (r + 1)` of inter-event gaps, `r = sd / mean`.
///
/// Needs at least two gaps and a positive mean gap.
pub fn burstiness(gaps: &[f64]) -> Option<f64> {
    if gaps.len() < 2 {
        return None;
    }
    let stats = SeriesStats::of(gaps)?;
    if stats.mean <= 0.0 {
        return None;
    }
    let r = stats.sd / stats.mean;
    Some((r - 1.0) / (r + 1.0))
}

/// Day gaps between consecutive event dates (already sorted).
pub fn inter_event_gaps(days: &[i64]) -> Vec<f64> {
    days.windows(2).map(|w| (w[1] - w[0]) as f64).collect()
}

/// Largest value strictly below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

/// Second-order coefficient of variation `sqrt(cv^2 / (1 + cv^2))`.
///
/// Needs at least two points and a non-zero mean.
pub fn volatility(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let cv = SeriesStats::of(values)?.cv()?;
    let cv2 = cv * cv;
    // cv beyond ~1e8 would otherwise round up to exactly 1
    Some((cv2 / (1.0 + cv2)).sqrt().min(BELOW_ONE))
}
