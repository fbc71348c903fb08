//! Piecewise-constant 2D distributions over octahedral grids.

use crate::math::{Vec3, FOUR_PI};
use crate::octa::{octa_dir_to_uv, octa_uv_to_dir};

/// Marginal/conditional CDF pair over a `cols x rows` grid stored row-major.
#[derive(Clone, Debug)]
pub struct Distribution2D {
    cols: usize,
    rows: usize,
    values: Vec<f64>,
    /// Normalized inclusive scan of the row sums.
    marginal: Vec<f64>,
    /// Normalized inclusive scan within each row.
    conditional: Vec<f64>,
    row_sums: Vec<f64>,
    total: f64,
}

/// Cell picked by [`Distribution2D::sample`] and the leftover of `u` inside it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSample {
    pub col: usize,
    pub row: usize,
    pub du: f64,
    pub dv: f64,
}

impl Distribution2D {
    /// `values` must be non-negative with a positive total.
    pub fn new(values: Vec<f64>, cols: usize, rows: usize) -> Self {
        assert_eq!(values.len(), cols * rows);
        let mut conditional = vec![0.0; cols * rows];
        let mut row_sums = vec![0.0; rows];
        for r in 0..rows {
            let row = &values[r * cols..(r + 1) * cols];
            let out = &mut conditional[r * cols..(r + 1) * cols];
            let mut acc = 0.0;
            for (o, &v) in out.iter_mut().zip(row) {
                debug_assert!(v >= 0.0 && v.is_finite());
                acc += v;
                *o = acc;
            }
            row_sums[r] = acc;
            if acc > 0.0 {
                out.iter_mut().for_each(|o| *o /= acc);
            } else {
                // an empty row is never selected; keep its CDF well formed
                for (c, o) in out.iter_mut().enumerate() {
                    *o = (c + 1) as f64 / cols as f64;
                }
            }
            out[cols - 1] = 1.0;
        }
        let mut marginal = vec![0.0; rows];
        let mut acc = 0.0;
        for (m, &s) in marginal.iter_mut().zip(&row_sums) {
            acc += s;
            *m = acc;
        }
        let total = acc;
        assert!(total > 0.0, "distribution needs positive mass");
        marginal.iter_mut().for_each(|m| *m /= total);
        marginal[rows - 1] = 1.0;
        Self {
            cols,
            rows,
            values,
            marginal,
            conditional,
            row_sums,
            total,
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn marginal_cdf(&self) -> &[f64] {
        &self.marginal
    }

    pub fn conditional_cdf(&self, row: usize) -> &[f64] {
        &self.conditional[row * self.cols..(row + 1) * self.cols]
    }

    /// Discrete probability of one cell.
    #[inline]
    pub fn cell_probability(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.cols + col] / self.total
    }

    /// `u1` picks the row through the marginal, `u2` the column within it.
    pub fn sample(&self, u1: f64, u2: f64) -> CellSample {
        let (row, dv) = invert(&self.marginal, u1);
        let (col, du) = invert(self.conditional_cdf(row), u2);
        CellSample { col, row, du, dv }
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.row_sums[row]
    }
}

/// Index of the first CDF entry above `u`, skipping zero-width entries, and
/// the relative position of `u` inside that entry.
fn invert(cdf: &[f64], u: f64) -> (usize, f64) {
    let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
    let lo = if i == 0 { 0.0 } else { cdf[i - 1] };
    let w = cdf[i] - lo;
    let r = if w > 0.0 { ((u - lo) / w).clamp(0.0, 1.0 - f64::EPSILON) } else { 0.5 };
    (i, r)
}

/// Guiding distribution over an `N x N` octahedral radiance grid.
#[derive(Clone, Debug)]
pub struct GuidingDistribution {
    dist: Distribution2D,
    n: usize,
}

pub fn build_distribution(values: &[f64], n: usize) -> GuidingDistribution {
    GuidingDistribution {
        dist: Distribution2D::new(values.to_vec(), n, n),
        n,
    }
}

impl GuidingDistribution {
    pub fn resolution(&self) -> usize {
        self.n
    }

    pub fn inner(&self) -> &Distribution2D {
        &self.dist
    }

    /// Solid-angle density of a cell.
    pub fn pdf_cell(&self, col: usize, row: usize) -> f64 {
        self.dist.cell_probability(col, row) * (self.n * self.n) as f64 / FOUR_PI
    }

    pub fn pdf(&self, dir: Vec3) -> f64 {
        let (c, r) = octa_dir_to_uv(dir).cell(self.n);
        self.pdf_cell(c, r)
    }

    pub fn sample(&self, u1: f64, u2: f64) -> (Vec3, f64) {
        let s = self.dist.sample(u1, u2);
        let n = self.n as f64;
        let dir = octa_uv_to_dir((s.col as f64 + s.du) / n, (s.row as f64 + s.dv) / n);
        (dir, self.pdf(dir))
    }
}
