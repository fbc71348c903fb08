//! Separable Gaussian blur on square octahedral grids.

use crate::octa::wrap_cell;

/// Normalized 1D kernel truncated at `ceil(3 sigma)` taps, capped below `n`.
pub fn gaussian_kernel(sigma: f64, n: usize) -> Vec<f64> {
    let radius = ((3.0 * sigma).ceil() as usize).min(n.saturating_sub(1));
    let mut w: Vec<f64> = (0..=2 * radius)
        .map(|i| {
            let k = i as f64 - radius as f64;
            (-k * k / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Blurs an `n x n` row-major grid. Taps that leave the square follow the
/// octahedral fold, which keeps the operator doubly stochastic: constants
/// stay constant and the grid total is preserved.
pub fn gaussian_blur(grid: &[f64], n: usize, sigma: f64) -> Vec<f64> {
    assert_eq!(grid.len(), n * n, "grid must be n x n");
    if sigma <= 0.0 || n < 2 {
        return grid.to_vec();
    }
    let kernel = gaussian_kernel(sigma, n);
    let radius = (kernel.len() / 2) as isize;
    let mut tmp = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for (i, w) in kernel.iter().enumerate() {
                let (sc, sr) = wrap_cell(c as isize + i as isize - radius, r as isize, n);
                acc += w * grid[sr * n + sc];
            }
            tmp[r * n + c] = acc;
        }
    }
    let mut out = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for (i, w) in kernel.iter().enumerate() {
                let (sc, sr) = wrap_cell(c as isize, r as isize + i as isize - radius, n);
                acc += w * tmp[sr * n + sc];
            }
            out[r * n + c] = acc;
        }
    }
    out
}
