//! Binned-SAH bounding volume hierarchy over scene triangles.

use crate::math::{Aabb, Ray, Vec3};

use super::Triangle;

const MAX_LEAF: usize = 4;
const BINS: usize = 12;

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    // leaf: first primitive index; interior: index of the second child
    offset: u32,
    count: u32,
    axis: u8,
}

#[derive(Clone, Debug, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    indices: Vec<u32>,
}

/// Closest-hit record produced by the raw triangle tests.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawHit {
    pub t: f64,
    pub triangle: u32,
}

/// Möller-Trumbore; returns `t` when inside `(t_min, t_max)`.
#[inline]
pub fn intersect_triangle(tri: &Triangle, ray: &Ray, t_min: f64, t_max: f64) -> Option<f64> {
    let e1 = tri.v[1] - tri.v[0];
    let e2 = tri.v[2] - tri.v[0];
    let p = ray.dir.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = ray.origin - tri.v[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.dir.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    (t > t_min && t < t_max).then_some(t)
}

/// Strict ordering used by every closest-hit search: nearer wins, equal
/// distances resolve to the lower triangle id.
#[inline]
pub fn closer(t: f64, id: u32, best: Option<RawHit>) -> bool {
    match best {
        None => true,
        Some(b) => t < b.t || (t == b.t && id < b.triangle),
    }
}

pub fn brute_force(tris: &[Triangle], ray: &Ray, t_min: f64, t_max: f64) -> Option<RawHit> {
    let mut best = None;
    for (i, tri) in tris.iter().enumerate() {
        if let Some(t) = intersect_triangle(tri, ray, t_min, t_max) {
            if closer(t, i as u32, best) {
                best = Some(RawHit { t, triangle: i as u32 });
            }
        }
    }
    best
}

struct BuildPrim {
    bounds: Aabb,
    centroid: Vec3,
    index: u32,
}

impl Bvh {
    pub fn build(tris: &[Triangle]) -> Self {
        let mut prims: Vec<BuildPrim> = tris
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let mut b = Aabb::EMPTY;
                for v in t.v {
                    b.grow(v);
                }
                BuildPrim {
                    bounds: b,
                    centroid: b.center(),
                    index: i as u32,
                }
            })
            .collect();
        let mut bvh = Bvh::default();
        if prims.is_empty() {
            return bvh;
        }
        bvh.nodes.reserve(2 * prims.len());
        let len = prims.len();
        bvh.build_recursive(&mut prims, 0, len);
        bvh.indices = prims.iter().map(|p| p.index).collect();
        bvh
    }

    fn build_recursive(&mut self, prims: &mut [BuildPrim], start: usize, end: usize) -> usize {
        let node_index = self.nodes.len();
        let slice = &mut prims[start..end];
        let bounds = slice.iter().fold(Aabb::EMPTY, |b, p| b.union(p.bounds));
        self.nodes.push(Node {
            bounds,
            offset: start as u32,
            count: slice.len() as u32,
            axis: 0,
        });
        if slice.len() <= MAX_LEAF {
            return node_index;
        }

        let mut cbounds = Aabb::EMPTY;
        for p in slice.iter() {
            cbounds.grow(p.centroid);
        }
        let ext = cbounds.extent();
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };

        let split = if ext[axis] <= 0.0 {
            None
        } else {
            Self::sah_split(slice, &cbounds, axis)
        };
        let mid = split
            .map(|bin| {
                let lo = cbounds.min[axis];
                let scale = BINS as f64 / ext[axis];
                partition(slice, |p| {
                    (((p.centroid[axis] - lo) * scale) as usize).min(BINS - 1) <= bin
                })
            })
            .filter(|&m| m > 0 && m < slice.len())
            .unwrap_or_else(|| {
                slice.sort_by(|a, b| a.centroid[axis].total_cmp(&b.centroid[axis]));
                slice.len() / 2
            });

        self.build_recursive(prims, start, start + mid);
        let right = self.build_recursive(prims, start + mid, end);
        let node = &mut self.nodes[node_index];
        node.offset = right as u32;
        node.count = 0;
        node.axis = axis as u8;
        node_index
    }

    fn sah_split(slice: &[BuildPrim], cbounds: &Aabb, axis: usize) -> Option<usize> {
        let mut counts = [0usize; BINS];
        let mut boxes = [Aabb::EMPTY; BINS];
        let lo = cbounds.min[axis];
        let scale = BINS as f64 / cbounds.extent()[axis];
        for p in slice {
            let b = (((p.centroid[axis] - lo) * scale) as usize).min(BINS - 1);
            counts[b] += 1;
            boxes[b] = boxes[b].union(p.bounds);
        }
        let mut best: Option<(usize, f64)> = None;
        for split in 0..BINS - 1 {
            let (mut lb, mut rb) = (Aabb::EMPTY, Aabb::EMPTY);
            let (mut lc, mut rc) = (0, 0);
            for i in 0..=split {
                lb = lb.union(boxes[i]);
                lc += counts[i];
            }
            for i in split + 1..BINS {
                rb = rb.union(boxes[i]);
                rc += counts[i];
            }
            if lc == 0 || rc == 0 {
                continue;
            }
            let cost = lc as f64 * lb.surface_area() + rc as f64 * rb.surface_area();
            if best.is_none_or(|(_, c)| cost < c) {
                best = Some((split, cost));
            }
        }
        best.map(|(split, _)| split)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn intersect(&self, tris: &[Triangle], ray: &Ray, t_min: f64, t_max: f64) -> Option<RawHit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z);
        let neg = [ray.dir.x < 0.0, ray.dir.y < 0.0, ray.dir.z < 0.0];
        let mut best: Option<RawHit> = None;
        let mut stack = [0u32; 64];
        let mut sp = 0usize;
        let mut current = 0usize;
        loop {
            let node = &self.nodes[current];
            let limit = best.map_or(t_max, |b| b.t);
            // slack so equal-distance hits still reach the id tie-break
            let slack = limit + limit.abs() * 1e-9 + 1e-12;
            if node.bounds.hit(ray.origin, inv, t_min, slack).is_some() {
                if node.count > 0 {
                    let first = node.offset as usize;
                    for &ti in &self.indices[first..first + node.count as usize] {
                        if let Some(t) = intersect_triangle(&tris[ti as usize], ray, t_min, t_max) {
                            if closer(t, ti, best) {
                                best = Some(RawHit { t, triangle: ti });
                            }
                        }
                    }
                } else {
                    let (near, far) = if neg[node.axis as usize] {
                        (node.offset as usize, current + 1)
                    } else {
                        (current + 1, node.offset as usize)
                    };
                    stack[sp] = far as u32;
                    sp += 1;
                    current = near;
                    continue;
                }
            }
            if sp == 0 {
                break;
            }
            sp -= 1;
            current = stack[sp] as usize;
        }
        best
    }
}

fn partition<T>(items: &mut [T], pred: impl Fn(&T) -> bool) -> usize {
    let mut i = 0;
    for j in 0..items.len() {
        if pred(&items[j]) {
            items.swap(i, j);
            i += 1;
        }
    }
    i
}
