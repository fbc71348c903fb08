//! Incoming radiance fields generated by cone tracing the octree.

use crate::blur::gaussian_blur;
use crate::math::{Vec3, FOUR_PI};
use crate::octa::cell_direction;
use crate::rng::RngStream;
use crate::scene::Scene;
use crate::svo::SvoCache;

pub const DEFAULT_EPSILON: f64 = 1e-2;
pub const DEFAULT_BLUR_SIGMA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldParams {
    pub resolution: usize,
    pub jitter: bool,
    /// Zero or negative disables the blur.
    pub blur_sigma: f64,
    pub epsilon: f64,
}

impl FieldParams {
    pub fn new(resolution: usize) -> Self {
        Self {
            resolution,
            jitter: true,
            blur_sigma: DEFAULT_BLUR_SIGMA,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadianceField {
    pub resolution: usize,
    /// Row-major luminance values, `row * N + col`.
    pub values: Vec<f64>,
    pub origin: Vec3,
    /// Sub-cell offset shared by every cell direction, in cell units.
    pub jitter: (f64, f64),
}

impl RadianceField {
    pub fn value(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.resolution + col]
    }

    pub fn argmax(&self) -> (usize, usize) {
        let i = self
            .values
            .iter()
            .enumerate()
            .fold(0, |best, (i, &v)| if v > self.values[best] { i } else { best });
        (i % self.resolution, i / self.resolution)
    }
}

/// Luminance of one cone per cell, before filtering.
pub fn raw_field(svo: &SvoCache, scene: &Scene, origin: Vec3, n: usize, jitter: (f64, f64)) -> Vec<f64> {
    let aperture = FOUR_PI / (n * n) as f64;
    let mut out = vec![0.0; n * n];
    for row in 0..n {
        for col in 0..n {
            let dir = cell_direction(col, row, n, jitter);
            if let Some(s) = svo.cone_trace(scene, origin, dir, aperture) {
                out[row * n + col] = s.radiance.luminance();
            }
        }
    }
    out
}

pub fn generate_field(svo: &SvoCache, scene: &Scene, origin: Vec3, params: &FieldParams, rng: &mut RngStream) -> RadianceField {
    let n = params.resolution;
    let jitter = if params.jitter {
        let (a, b) = rng.next_2d();
        (a - 0.5, b - 0.5)
    } else {
        (0.0, 0.0)
    };
    let raw = raw_field(svo, scene, origin, n, jitter);
    let mut values = if params.blur_sigma > 0.0 {
        gaussian_blur(&raw, n, params.blur_sigma)
    } else {
        raw
    };
    for v in &mut values {
        *v = v.max(params.epsilon);
    }
    RadianceField {
        resolution: n,
        values,
        origin,
        jitter,
    }
}
