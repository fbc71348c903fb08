//! Positional binning of path vertices over the octree, and material batching.

use rayon::prelude::*;

use crate::svo::SvoCache;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpatialBin {
    /// Octree node shared by all members.
    pub node: u32,
    /// Indices into the slice given to [`partition_spatial`], ascending.
    pub members: Vec<u32>,
}

/// Bins vertices by their octree leaves.
///
/// Every vertex bumps its leaf counter, counts are summed bottom-up down to
/// level `l_min`, and each vertex binds to the first node on its way to the
/// root whose count reaches `c_ray` or whose level is `l_min`. The ray
/// counters are left zeroed on return.
pub fn partition_spatial(leaves: &[u32], svo: &SvoCache, l_min: u32, c_ray: u32) -> Vec<SpatialBin> {
    if leaves.is_empty() {
        return Vec::new();
    }
    let l_min = l_min.min(svo.depth());
    leaves.par_iter().for_each(|&leaf| svo.add_ray(leaf));
    for level in (l_min..svo.depth()).rev() {
        for id in svo.level_range(level) {
            let n = svo.node(id as u32);
            let first = n.first_child;
            let total: u32 = (first..first + n.child_mask.count_ones()).map(|c| svo.ray_count(c)).sum();
            svo.set_ray_count(id as u32, total);
        }
    }
    let assigned: Vec<u32> = leaves
        .par_iter()
        .map(|&leaf| {
            let mut id = leaf;
            loop {
                let n = svo.node(id);
                if svo.ray_count(id) >= c_ray || n.level as u32 <= l_min {
                    return id;
                }
                id = n.parent;
            }
        })
        .collect();
    for level in l_min..=svo.depth() {
        for id in svo.level_range(level) {
            svo.set_ray_count(id as u32, 0);
        }
    }
    group_by_key(&assigned)
        .into_iter()
        .map(|(node, members)| SpatialBin { node, members })
        .collect()
}

/// Live vertices grouped by material id; groups ascend by id, members keep input order.
pub fn partition_material(materials: &[u32]) -> Vec<(u32, Vec<u32>)> {
    group_by_key(materials)
}

fn group_by_key(keys: &[u32]) -> Vec<(u32, Vec<u32>)> {
    let mut order: Vec<u32> = (0..keys.len() as u32).collect();
    order.sort_by_key(|&i| keys[i as usize]);
    let mut out: Vec<(u32, Vec<u32>)> = Vec::new();
    for i in order {
        let k = keys[i as usize];
        match out.last_mut() {
            Some((last, members)) if *last == k => members.push(i),
            _ => out.push((k, vec![i])),
        }
    }
    out
}
