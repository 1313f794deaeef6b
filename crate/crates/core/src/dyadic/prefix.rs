use crate::error::{Error, Result};

/// Per-cell centering subtracted before summation.
#[derive(Debug, Clone, PartialEq)]
pub enum Centering {
    Zero,
    Uniform(f64),
    /// Row-major, one entry per cell.
    PerCell(Vec<f64>),
}

impl Centering {
    #[inline]
    fn at(&self, idx: usize) -> f64 {
        match self {
            Centering::Zero => 0.0,
            Centering::Uniform(c) => *c,
            Centering::PerCell(v) => v[idx],
        }
    }
}

/// `S(u, v) = Σ_{i ≤ u, j ≤ v} (x_{ij} − c_{ij})` for `0 ≤ u ≤ rows`, `0 ≤ v ≤ cols`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixSumTable {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl PrefixSumTable {
    /// Builds the table from row-major `values`. Rows and columns are
    /// accumulated in double-double arithmetic before rounding.
    pub fn build(rows: usize, cols: usize, values: &[f64], centering: &Centering) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::Dimension(format!("{} values for a {rows} × {cols} grid", values.len())));
        }
        if let Centering::PerCell(c) = centering {
            if c.len() != values.len() {
                return Err(Error::Dimension(format!("{} centering entries for {} cells", c.len(), values.len())));
            }
        }
        let w = cols + 1;
        let mut data = vec![0.0; (rows + 1) * w];
        let mut col_hi = vec![0.0; cols];
        let mut col_lo = vec![0.0; cols];
        for i in 0..rows {
            let (mut hi, mut lo) = (0.0f64, 0.0f64);
            for j in 0..cols {
                let idx = i * cols + j;
                let (d, e) = two_sum(values[idx], -centering.at(idx));
                let (s, e2) = two_sum(hi, d);
                hi = s;
                lo += e + e2;
                let row = hi + lo;
                let row_lo = lo - (row - hi);
                let (c, e3) = two_sum(col_hi[j], row);
                col_hi[j] = c;
                col_lo[j] += e3 + row_lo;
                data[(i + 1) * w + j + 1] = col_hi[j] + col_lo[j];
            }
        }
        Ok(PrefixSumTable { rows, cols, data })
    }

    pub fn from_sample(field: &crate::model::FieldSample, centering: &Centering) -> Result<Self> {
        Self::build(field.rows(), field.cols(), &field.values, centering)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, u: usize, v: usize) -> f64 {
        self.data[u * (self.cols + 1) + v]
    }

    /// Sum over rows `r0 < i ≤ r1` and columns `c0 < j ≤ c1` (one-based cells).
    #[inline]
    pub fn rect(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> f64 {
        self.at(r1, c1) - self.at(r0, c1) - self.at(r1, c0) + self.at(r0, c0)
    }

    /// `max |S(u, v)|` over `1 ≤ u ≤ u_max`, `1 ≤ v ≤ v_max`.
    pub fn max_abs(&self, u_max: usize, v_max: usize) -> f64 {
        let mut best = 0.0f64;
        for u in 1..=u_max.min(self.rows) {
            for v in 1..=v_max.min(self.cols) {
                best = best.max(self.at(u, v).abs());
            }
        }
        best
    }
}
