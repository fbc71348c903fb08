//! Sparse voxel octree caching per-voxel radiant exitance.
//!
//! Nodes are stored level by level (root first), each level sorted by Morton
//! code, so the children of a node are contiguous in the next level. Every
//! node keeps one representative normal `N`; side `a` faces `N`, side `b`
//! faces `-N`, and each side accumulates its own exitance.

mod cluster;
mod dump;
mod voxelize;

pub use cluster::cluster_normals;
pub use dump::{read_svo_dump, write_svo_dump, SVO_MAGIC, SVO_VERSION};
pub use voxelize::{tri_box_overlap, voxelize, voxelize_triangles, VoxelFragment, VoxelGrid};

use std::sync::atomic::{AtomicU32, Ordering};

use crate::error::{Error, Result};
use crate::math::{Ray, Rgb, Vec3};
use crate::morton::encode_unchecked;
use crate::rng::{stream_id, RngStream};
use crate::scene::Scene;

pub const NO_NODE: u32 = u32::MAX;

/// Which of the two stored normals an operation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A = 0,
    B = 1,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::A => 1.0,
            Side::B => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvoNode {
    pub level: u8,
    /// Morton code of the node's cell at its own level.
    pub code: u64,
    pub child_mask: u8,
    pub first_child: u32,
    pub parent: u32,
    /// `normal_a`; `normal_b` is its exact negation.
    pub normal: Vec3,
    pub sum: [Rgb; 2],
    pub weight: [f64; 2],
    /// Propagated exitance for interior nodes.
    pub mean: [Rgb; 2],
}

impl SvoNode {
    pub fn is_leaf(&self) -> bool {
        self.child_mask == 0
    }

    pub fn side_normal(&self, side: Side) -> Vec3 {
        self.normal * side.sign()
    }

    /// Side whose normal is closest to `dir` (ties go to `a`).
    #[inline]
    pub fn side_towards(&self, dir: Vec3) -> Side {
        if dir.dot(self.normal) >= -dir.dot(self.normal) {
            Side::A
        } else {
            Side::B
        }
    }

    /// Side whose normal faces against `dir`, i.e. towards a cone travelling along `dir`.
    #[inline]
    pub fn side_facing(&self, dir: Vec3) -> Side {
        if dir.dot(self.normal) <= -dir.dot(self.normal) {
            Side::A
        } else {
            Side::B
        }
    }

    pub fn exitance(&self, side: Side) -> Rgb {
        let s = side as usize;
        if self.is_leaf() {
            if self.weight[s] > 0.0 {
                self.sum[s] / self.weight[s]
            } else {
                Rgb::BLACK
            }
        } else {
            self.mean[s]
        }
    }
}

/// Result of a cone query: the node whose footprint matched and what it returned.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConeSample {
    pub node: u32,
    pub level: u32,
    pub distance: f64,
    pub radiance: Rgb,
}

#[derive(Debug)]
pub struct SvoCache {
    nodes: Vec<SvoNode>,
    level_offsets: Vec<usize>,
    depth: u32,
    grid: VoxelGrid,
    ray_counts: Vec<AtomicU32>,
}

impl Clone for SvoCache {
    fn clone(&self) -> Self {
        Self {
            nodes: self.nodes.clone(),
            level_offsets: self.level_offsets.clone(),
            depth: self.depth,
            grid: self.grid,
            ray_counts: self
                .ray_counts
                .iter()
                .map(|c| AtomicU32::new(c.load(Ordering::Relaxed)))
                .collect(),
        }
    }
}

impl SvoCache {
    /// Voxelizes `scene` at `resolution^3` and builds the tree.
    pub fn from_scene(scene: &Scene, resolution: u32, seed: u64) -> Result<Self> {
        if !resolution.is_power_of_two() || resolution < 2 {
            return Err(Error::Config(format!("octree resolution {resolution} is not a power of two")));
        }
        let grid = VoxelGrid::enclosing(&scene.bounds, resolution);
        let fragments = voxelize(scene, &grid);
        build_octree(&fragments, grid, seed)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn resolution(&self) -> u32 {
        self.grid.resolution
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn nodes(&self) -> &[SvoNode] {
        &self.nodes
    }

    pub fn node(&self, id: u32) -> &SvoNode {
        &self.nodes[id as usize]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Node ids of `level` (0 = root).
    pub fn level_range(&self, level: u32) -> std::ops::Range<usize> {
        self.level_offsets[level as usize]..self.level_offsets[level as usize + 1]
    }

    pub fn leaf_count(&self) -> usize {
        self.level_range(self.depth).len()
    }

    /// Persistent memory of the node array in bytes.
    pub fn memory_bytes(&self) -> usize {
        self.nodes.len() * (std::mem::size_of::<SvoNode>() + std::mem::size_of::<AtomicU32>())
    }

    /// Edge length of a node's cell at `level`.
    pub fn voxel_side(&self, level: u32) -> f64 {
        self.grid.side / (1u64 << level) as f64
    }

    /// Leaf containing `p` found by descending from the root, `None` when
    /// that voxel is empty.
    pub fn descend_leaf(&self, p: Vec3) -> Result<Option<u32>> {
        let c = self.grid.locate(p).ok_or(Error::OutOfBounds([p.x, p.y, p.z]))?;
        let code = encode_unchecked(c[0], c[1], c[2]);
        let mut id = 0usize;
        for level in 0..self.depth {
            let node = &self.nodes[id];
            let octant = ((code >> (3 * (self.depth - level - 1))) & 7) as u8;
            if node.child_mask & (1 << octant) == 0 {
                return Ok(None);
            }
            let rank = (node.child_mask & ((1u8 << octant) - 1)).count_ones();
            id = node.first_child as usize + rank as usize;
        }
        Ok(Some(id as u32))
    }

    /// Adds one radiance estimate to the side of `leaf` that `outgoing` points to.
    pub fn accumulate_exitance(&mut self, leaf: u32, outgoing: Vec3, radiance: Rgb) {
        debug_assert!(radiance.is_finite() && radiance.min_channel() >= 0.0);
        let node = &mut self.nodes[leaf as usize];
        let s = node.side_towards(outgoing) as usize;
        node.sum[s] += radiance;
        node.weight[s] += 1.0;
    }

    /// Forgets every exitance estimate.
    pub fn clear_exitance(&mut self) {
        for n in &mut self.nodes {
            n.sum = [Rgb::BLACK; 2];
            n.weight = [0.0; 2];
            n.mean = [Rgb::BLACK; 2];
        }
    }

    /// Interior exitance = average over materialized children of the side
    /// whose normal best matches the parent's side.
    pub fn propagate_up(&mut self) {
        for level in (0..self.depth).rev() {
            for id in self.level_range(level) {
                let (first, count, normal) = {
                    let n = &self.nodes[id];
                    (n.first_child as usize, n.child_mask.count_ones() as usize, n.normal)
                };
                let mut acc = [Rgb::BLACK; 2];
                for child in &self.nodes[first..first + count] {
                    for side in [Side::A, Side::B] {
                        let target = normal * side.sign();
                        acc[side as usize] += child.exitance(child.side_towards(target));
                    }
                }
                let inv = 1.0 / count as f64;
                self.nodes[id].mean = [acc[0] * inv, acc[1] * inv];
            }
        }
    }

    pub fn clear_ray_counts(&self) {
        for c in &self.ray_counts {
            c.store(0, Ordering::Relaxed);
        }
    }

    #[inline]
    pub fn add_ray(&self, node: u32) {
        self.ray_counts[node as usize].fetch_add(1, Ordering::Relaxed);
    }

    pub fn ray_count(&self, node: u32) -> u32 {
        self.ray_counts[node as usize].load(Ordering::Relaxed)
    }

    pub(crate) fn set_ray_count(&self, node: u32, v: u32) {
        self.ray_counts[node as usize].store(v, Ordering::Relaxed);
    }

    /// Node on the ancestor chain of `leaf` whose cross-section `side^2` is
    /// closest to `area`; ties keep the finer node.
    pub fn match_footprint(&self, leaf: u32, area: f64) -> u32 {
        let mut best = leaf;
        let mut best_err = f64::INFINITY;
        let mut id = leaf;
        loop {
            let node = &self.nodes[id as usize];
            let s = self.voxel_side(node.level as u32);
            let err = (area - s * s).abs();
            if err < best_err {
                best_err = err;
                best = id;
            }
            if node.parent == NO_NODE {
                break;
            }
            id = node.parent;
        }
        best
    }

    /// Cone query along `dir` with solid-angle aperture `aperture`.
    ///
    /// The central ray finds the surface; the cone footprint `r^2 * aperture`
    /// selects the tree level; the node's exitance on the side facing the cone
    /// is weighted by the clamped cosine between the cone axis and that side.
    pub fn cone_trace(&self, scene: &Scene, origin: Vec3, dir: Vec3, aperture: f64) -> Option<ConeSample> {
        let hit = scene.intersect(&Ray::new(origin, dir))?;
        let leaf = self.descend_leaf(hit.position).ok().flatten()?;
        let area = hit.t * hit.t * aperture;
        let id = self.match_footprint(leaf, area);
        let node = &self.nodes[id as usize];
        let side = node.side_facing(dir);
        let cos = (-dir.dot(node.side_normal(side))).max(0.0);
        Some(ConeSample {
            node: id,
            level: node.level as u32,
            distance: hit.t,
            radiance: node.exitance(side) * cos,
        })
    }

    /// Ancestor of `node` at `level` (or `node` itself).
    pub fn ancestor_at(&self, mut node: u32, level: u32) -> u32 {
        while self.nodes[node as usize].level as u32 > level {
            node = self.nodes[node as usize].parent;
        }
        node
    }

    /// Axis-aligned bounds of a node's cell.
    pub fn node_bounds(&self, id: u32) -> crate::math::Aabb {
        let n = &self.nodes[id as usize];
        let (x, y, z) = crate::morton::morton_decode(n.code);
        let s = self.voxel_side(n.level as u32);
        let min = self.grid.origin + Vec3::new(x as f64 * s, y as f64 * s, z as f64 * s);
        crate::math::Aabb::new(min, min + Vec3::splat(s))
    }

    pub(crate) fn from_parts(nodes: Vec<SvoNode>, level_offsets: Vec<usize>, depth: u32, grid: VoxelGrid) -> Self {
        let ray_counts = (0..nodes.len()).map(|_| AtomicU32::new(0)).collect();
        Self {
            nodes,
            level_offsets,
            depth,
            grid,
            ray_counts,
        }
    }
}

/// Builds the tree from voxel fragments: leaves are the unique Morton codes,
/// interior levels are materialized bottom-up and every node gets its normal
/// pair from [`cluster_normals`].
pub fn build_octree(fragments: &[VoxelFragment], grid: VoxelGrid, seed: u64) -> Result<SvoCache> {
    if fragments.is_empty() {
        return Err(Error::EmptyOctree);
    }
    let depth = grid.resolution.trailing_zeros();
    let mut keyed: Vec<(u64, Vec3)> = fragments
        .iter()
        .map(|f| (encode_unchecked(f.coord[0], f.coord[1], f.coord[2]), f.normal))
        .collect();
    keyed.sort_by_key(|k| k.0);

    // levels[l] holds (code, normal, child range in levels[l + 1]) sorted by code
    let mut levels: Vec<Vec<(u64, Vec3, u8, usize)>> = vec![Vec::new(); depth as usize + 1];
    let mut start = 0;
    while start < keyed.len() {
        let code = keyed[start].0;
        let end = start + keyed[start..].partition_point(|k| k.0 == code);
        let normals: Vec<Vec3> = keyed[start..end].iter().map(|k| k.1).collect();
        let mut rng = RngStream::new(seed, stream_id(&[depth as u64, code]), 0);
        let (n, _) = cluster_normals(&normals, &mut rng);
        levels[depth as usize].push((code, n, 0, 0));
        start = end;
    }
    for level in (0..depth as usize).rev() {
        let (upper, lower) = levels.split_at_mut(level + 1);
        let children = &lower[0];
        let parents = &mut upper[level];
        let mut i = 0;
        while i < children.len() {
            let code = children[i].0 >> 3;
            let mut mask = 0u8;
            let mut normals = Vec::with_capacity(8);
            let first = i;
            while i < children.len() && children[i].0 >> 3 == code {
                mask |= 1 << (children[i].0 & 7);
                normals.push(children[i].1);
                i += 1;
            }
            let mut rng = RngStream::new(seed, stream_id(&[level as u64, code]), 0);
            let (n, _) = cluster_normals(&normals, &mut rng);
            parents.push((code, n, mask, first));
        }
    }

    let mut level_offsets = Vec::with_capacity(depth as usize + 2);
    let mut acc = 0;
    for l in &levels {
        level_offsets.push(acc);
        acc += l.len();
    }
    level_offsets.push(acc);

    let mut nodes = Vec::with_capacity(acc);
    for (l, entries) in levels.iter().enumerate() {
        for &(code, normal, mask, first) in entries {
            let first_child = if mask == 0 { NO_NODE } else { (level_offsets[l + 1] + first) as u32 };
            nodes.push(SvoNode {
                level: l as u8,
                code,
                child_mask: mask,
                first_child,
                parent: NO_NODE,
                normal,
                sum: [Rgb::BLACK; 2],
                weight: [0.0; 2],
                mean: [Rgb::BLACK; 2],
            });
        }
    }
    for id in 0..nodes.len() {
        if nodes[id].child_mask != 0 {
            let first = nodes[id].first_child as usize;
            let count = nodes[id].child_mask.count_ones() as usize;
            for child in &mut nodes[first..first + count] {
                child.parent = id as u32;
            }
        }
    }
    Ok(SvoCache::from_parts(nodes, level_offsets, depth, grid))
}
