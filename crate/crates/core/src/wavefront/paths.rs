//! Per-depth path records and the end-of-sample exitance update.

use crate::math::{Rgb, Vec3};
use crate::svo::SvoCache;

/// Vertex positions and prefix throughputs of every path of one sample pass.
///
/// Slot `k = 0` of a path holds the camera position; surface vertices occupy
/// `1..=vertex_count`. `throughput[k]` is `T(p_1..p_k)`, with `T = 1` at the
/// first surface vertex.
#[derive(Clone, Debug)]
pub struct PathBuffer {
    pub max_depth: usize,
    pub positions: Vec<Vec3>,
    pub throughput: Vec<Rgb>,
    pub vertex_count: Vec<u32>,
    /// Radiance of the emitter that ended the path; black otherwise.
    pub emitted: Vec<Rgb>,
    pub pixel: Vec<u32>,
    pub radiance: Vec<Rgb>,
}

impl PathBuffer {
    pub fn new(paths: usize, max_depth: usize) -> Self {
        let stride = max_depth + 1;
        Self {
            max_depth,
            positions: vec![Vec3::ZERO; paths * stride],
            throughput: vec![Rgb::BLACK; paths * stride],
            vertex_count: vec![0; paths],
            emitted: vec![Rgb::BLACK; paths],
            pixel: (0..paths as u32).collect(),
            radiance: vec![Rgb::BLACK; paths],
        }
    }

    pub fn len(&self) -> usize {
        self.vertex_count.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count.is_empty()
    }

    #[inline]
    pub fn slot(&self, path: usize, k: usize) -> usize {
        path * (self.max_depth + 1) + k
    }

    pub fn position(&self, path: usize, k: usize) -> Vec3 {
        self.positions[self.slot(path, k)]
    }

    pub fn throughput_at(&self, path: usize, k: usize) -> Rgb {
        self.throughput[self.slot(path, k)]
    }

    pub fn record(&mut self, path: usize, k: usize, position: Vec3, throughput: Rgb) {
        let s = self.slot(path, k);
        self.positions[s] = position;
        self.throughput[s] = throughput;
        if k > 0 {
            self.vertex_count[path] = k as u32;
        }
    }
}

/// One exitance sample: radiance leaving `position` towards `direction`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deposit {
    pub path: u32,
    pub k: u32,
    pub position: Vec3,
    pub direction: Vec3,
    pub radiance: Rgb,
}

/// Deposits implied by every path that ended on an emitter, in path order.
///
/// The radiance leaving vertex `k` is `T(p_n) / T(p_k) * Le` per channel.
/// The emitter vertex itself (`k = n`) deposits `Le`, so emitters carry
/// their own exitance in the cache. Vertices whose prefix throughput has a
/// zero channel are skipped.
pub fn exitance_deposits(paths: &PathBuffer) -> Vec<Deposit> {
    let mut out = Vec::new();
    for p in 0..paths.len() {
        let le = paths.emitted[p];
        if le.is_black() {
            continue;
        }
        let n = paths.vertex_count[p] as usize;
        let tn = paths.throughput_at(p, n);
        for k in 1..=n {
            let tk = paths.throughput_at(p, k);
            if tk.any_zero() {
                continue;
            }
            let pos = paths.position(p, k);
            let dir = (paths.position(p, k - 1) - pos).normalized();
            let radiance = Rgb::new(tn.r / tk.r * le.r, tn.g / tk.g * le.g, tn.b / tk.b * le.b);
            out.push(Deposit {
                path: p as u32,
                k: k as u32,
                position: pos,
                direction: dir,
                radiance,
            });
        }
    }
    out
}

/// Applies [`exitance_deposits`] to the octree in path order; returns the number applied.
pub fn update_exitance(paths: &PathBuffer, svo: &mut SvoCache) -> usize {
    let mut applied = 0;
    for d in exitance_deposits(paths) {
        if !d.radiance.is_finite() {
            continue;
        }
        if let Ok(Some(leaf)) = svo.descend_leaf(d.position) {
            svo.accumulate_exitance(leaf, d.direction, d.radiance);
            applied += 1;
        }
    }
    applied
}
