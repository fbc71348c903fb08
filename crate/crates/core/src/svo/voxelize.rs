//! Conservative surface voxelization with the triangle/box separating-axis test.

use crate::math::{Aabb, Vec3};
use crate::scene::{Scene, Triangle};

/// A voxel touched by one triangle, with that triangle's geometric normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoxelFragment {
    pub coord: [u32; 3],
    pub normal: Vec3,
}

/// Cubic region of space split into `resolution^3` leaf voxels.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VoxelGrid {
    pub origin: Vec3,
    pub side: f64,
    pub resolution: u32,
}

impl VoxelGrid {
    /// Bounding cube of `bounds`, padded slightly so surfaces on the box faces
    /// end up strictly inside.
    pub fn enclosing(bounds: &Aabb, resolution: u32) -> Self {
        let ext = bounds.extent();
        let side = ext.max_component().max(1e-9);
        let pad = side * 1e-3;
        let side = side + 2.0 * pad;
        let center = bounds.center();
        Self {
            origin: center - Vec3::splat(side * 0.5),
            side,
            resolution,
        }
    }

    pub fn voxel_size(&self) -> f64 {
        self.side / self.resolution as f64
    }

    /// Voxel holding `p` under the half-open `[min, max)` rule, if inside the cube.
    pub fn locate(&self, p: Vec3) -> Option<[u32; 3]> {
        let mut c = [0u32; 3];
        let scale = self.resolution as f64 / self.side;
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) * scale).floor();
            if !(f >= 0.0 && f < self.resolution as f64) {
                return None;
            }
            c[a] = f as u32;
        }
        Some(c)
    }

    pub fn voxel_bounds(&self, c: [u32; 3]) -> Aabb {
        let s = self.voxel_size();
        let min = self.origin + Vec3::new(c[0] as f64 * s, c[1] as f64 * s, c[2] as f64 * s);
        Aabb::new(min, min + Vec3::splat(s))
    }
}

/// Every `(voxel, triangle)` pair whose closed boxes overlap produces one fragment.
pub fn voxelize(scene: &Scene, grid: &VoxelGrid) -> Vec<VoxelFragment> {
    voxelize_triangles(&scene.triangles, grid)
}

pub fn voxelize_triangles(tris: &[Triangle], grid: &VoxelGrid) -> Vec<VoxelFragment> {
    let vs = grid.voxel_size();
    let half = Vec3::splat(vs * 0.5);
    let r = grid.resolution as i64;
    let mut out = Vec::new();
    for tri in tris {
        if tri.area() <= 0.0 {
            continue;
        }
        let mut b = Aabb::EMPTY;
        for v in tri.v {
            b.grow(v);
        }
        let lo = |a: usize| ((((b.min[a] - grid.origin[a]) / vs).floor() as i64) - 1).clamp(0, r - 1);
        let hi = |a: usize| ((((b.max[a] - grid.origin[a]) / vs).floor() as i64) + 1).clamp(0, r - 1);
        for z in lo(2)..=hi(2) {
            for y in lo(1)..=hi(1) {
                for x in lo(0)..=hi(0) {
                    let c = [x as u32, y as u32, z as u32];
                    let center = grid.voxel_bounds(c).center();
                    if tri_box_overlap(center, half, &tri.v) {
                        out.push(VoxelFragment {
                            coord: c,
                            normal: tri.normal,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Akenine-Möller separating-axis test; touching counts as overlap.
pub fn tri_box_overlap(center: Vec3, half: Vec3, tri: &[Vec3; 3]) -> bool {
    let v = [tri[0] - center, tri[1] - center, tri[2] - center];
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];

    // cross products of box axes with triangle edges
    for edge in e {
        for axis in [Vec3::X, Vec3::Y, Vec3::Z] {
            let a = axis.cross(edge);
            let p0 = v[0].dot(a);
            let p1 = v[1].dot(a);
            let p2 = v[2].dot(a);
            let r = half.x * a.x.abs() + half.y * a.y.abs() + half.z * a.z.abs();
            let mn = p0.min(p1).min(p2);
            let mx = p0.max(p1).max(p2);
            if mn > r || mx < -r {
                return false;
            }
        }
    }

    for a in 0..3 {
        let mn = v[0][a].min(v[1][a]).min(v[2][a]);
        let mx = v[0][a].max(v[1][a]).max(v[2][a]);
        if mn > half[a] || mx < -half[a] {
            return false;
        }
    }

    let n = e[0].cross(e[1]);
    let d = n.dot(v[0]);
    let r = half.x * n.x.abs() + half.y * n.y.abs() + half.z * n.z.abs();
    d.abs() <= r
}
