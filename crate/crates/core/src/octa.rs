//! Concentric octahedral mapping between the unit sphere and `[0,1)^2`.
//!
//! Clarberg's equal-area variant: the upper hemisphere fills the inner
//! diamond, the lower hemisphere the four folded corners, and `+z` sits at
//! the square's center. Uniform density in `(u, v)` is uniform over solid angle.

use crate::math::{Direction3, Vec3, FOUR_PI, PI};

const ONE_MINUS_EPS: f64 = 1.0 - f64::EPSILON / 2.0;

/// Grid resolutions accepted for radiance fields.
pub const VALID_RESOLUTIONS: [usize; 5] = [8, 16, 32, 64, 128];

/// A point in the octahedral unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCoord {
    pub u: f64,
    pub v: f64,
}

impl GridCoord {
    /// Cell indices `(column, row)` on an `n x n` grid.
    #[inline]
    pub fn cell(self, n: usize) -> (usize, usize) {
        let c = ((self.u * n as f64) as usize).min(n - 1);
        let r = ((self.v * n as f64) as usize).min(n - 1);
        (c, r)
    }
}

/// Solid angle of one cell of an `n x n` grid.
#[inline]
pub fn cell_solid_angle(n: usize) -> f64 {
    FOUR_PI / (n * n) as f64
}

pub fn octa_dir_to_uv(d: Direction3) -> GridCoord {
    let (ax, ay, az) = (d.x.abs(), d.y.abs(), d.z.abs());
    // sqrt(1 - |z|) computed without cancellation near the poles
    let r = ((ax * ax + ay * ay) / (1.0 + az)).sqrt();
    let a = ax.max(ay);
    let b = if a == 0.0 { 0.0 } else { ax.min(ay) / a };
    let mut phi = b.atan() * (2.0 / PI);
    if ax < ay {
        phi = 1.0 - phi;
    }
    let mut v = phi * r;
    let mut u = r - v;
    if d.z < 0.0 {
        std::mem::swap(&mut u, &mut v);
        u = 1.0 - u;
        v = 1.0 - v;
    }
    let u = u.copysign(d.x);
    let v = v.copysign(d.y);
    GridCoord {
        u: ((u + 1.0) * 0.5).clamp(0.0, ONE_MINUS_EPS),
        v: ((v + 1.0) * 0.5).clamp(0.0, ONE_MINUS_EPS),
    }
}

pub fn octa_uv_to_dir(u: f64, v: f64) -> Direction3 {
    let su = 2.0 * u - 1.0;
    let sv = 2.0 * v - 1.0;
    let up = su.abs();
    let vp = sv.abs();
    let signed_distance = 1.0 - (up + vp);
    let r = 1.0 - signed_distance.abs();
    let phi = if r == 0.0 { 1.0 } else { (vp - up) / r + 1.0 } * (PI / 4.0);
    let z = (1.0 - r * r).copysign(signed_distance);
    let cos_phi = phi.cos().copysign(su);
    let sin_phi = phi.sin().copysign(sv);
    let s = r * (2.0 - r * r).max(0.0).sqrt();
    Vec3::new(cos_phi * s, sin_phi * s, z).normalized()
}

/// Direction through the center of cell `(col, row)` shifted by `offset` cells.
#[inline]
pub fn cell_direction(col: usize, row: usize, n: usize, offset: (f64, f64)) -> Direction3 {
    let inv = 1.0 / n as f64;
    let u = ((col as f64 + 0.5 + offset.0) * inv).clamp(0.0, ONE_MINUS_EPS);
    let v = ((row as f64 + 0.5 + offset.1) * inv).clamp(0.0, ONE_MINUS_EPS);
    octa_uv_to_dir(u, v)
}

/// Maps an out-of-range cell index onto the grid following the octahedral
/// fold: crossing an edge mirrors the coordinate and flips the other axis.
#[inline]
pub fn wrap_cell(col: isize, row: isize, n: usize) -> (usize, usize) {
    let n = n as isize;
    let (mut c, mut r) = (col, row);
    if c < 0 {
        c = -c - 1;
        r = n - 1 - r;
    } else if c >= n {
        c = 2 * n - 1 - c;
        r = n - 1 - r;
    }
    if r < 0 {
        r = -r - 1;
        c = n - 1 - c;
    } else if r >= n {
        r = 2 * n - 1 - r;
        c = n - 1 - c;
    }
    (c as usize, r as usize)
}
