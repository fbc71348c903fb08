//! Two-means clustering of surface normals inside a voxel.

use crate::math::Vec3;
use crate::rng::RngStream;

pub const MAX_ITERATIONS: usize = 32;

/// Lloyd iterations with `k = 2`, seeded with a random member normal and its
/// opposite. Returns the first cluster mean `N` and `-N`.
pub fn cluster_normals(normals: &[Vec3], rng: &mut RngStream) -> (Vec3, Vec3) {
    assert!(!normals.is_empty(), "cluster_normals needs at least one normal");
    let seed = normals[rng.next_index(normals.len())];
    let mut means = [seed, -seed];
    let mut assign: Vec<u8> = vec![u8::MAX; normals.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (n, slot) in normals.iter().zip(assign.iter_mut()) {
            let k = if n.dot(means[0]) >= n.dot(means[1]) { 0 } else { 1 };
            if *slot != k {
                *slot = k;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = [Vec3::ZERO; 2];
        for (n, &k) in normals.iter().zip(&assign) {
            sums[k as usize] += *n;
        }
        for k in 0..2 {
            let len = sums[k].length();
            // an empty or cancelled cluster keeps its previous mean
            if len > 1e-12 {
                means[k] = sums[k] / len;
            }
        }
    }
    (means[0], -means[0])
}
