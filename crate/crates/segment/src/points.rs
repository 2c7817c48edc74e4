//! Dense row-major point sets.

use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq)]
pub struct Points {
    pub n: usize,
    pub d: usize,
    pub data: Vec<f64>,
}

impl Points {
    pub fn zeros(n: usize, d: usize) -> Points {
        Points { n, d, data: vec![0.0; n * d] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Points {
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            assert_eq!(r.len(), d, "ragged rows");
            data.extend_from_slice(r);
        }
        Points { n: rows.len(), d, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn select(&self, idx: &[usize]) -> Points {
        let mut data = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Points { n: idx.len(), d: self.d, data }
    }

    /// Row indices in lexicographic order of the rows.
    pub fn sorted_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_by(|&a, &b| compare_rows(self.row(a), self.row(b)));
        idx
    }

    pub fn distinct_rows(&self) -> usize {
        if self.n == 0 {
            return 0;
        }
        let order = self.sorted_order();
        1 + order.windows(2).filter(|w| self.row(w[0]) != self.row(w[1])).count()
    }
}

pub fn compare_rows(a: &[f64], b: &[f64]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
