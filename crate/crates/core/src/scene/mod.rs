//! Scene description, ray casting and surface scattering.

mod bsdf;
mod bvh;
mod camera;
mod light;
mod loader;

pub use bsdf::{eval_bsdf, pdf_bsdf, sample_bsdf, BsdfSample};
pub use bvh::{brute_force, intersect_triangle, Bvh, RawHit};
pub use camera::Camera;
pub use light::{pdf_nee, sample_nee, NeeSample};
pub use loader::{load_scene, parse_obj, parse_scene_str};

use crate::error::{Error, Result};
use crate::math::{Aabb, Ray, Rgb, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaterialKind {
    Lambert,
    Mirror,
    Emitter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Material {
    pub name: String,
    pub kind: MaterialKind,
    /// Albedo for lambert and mirror, emitted radiance for emitters.
    pub color: Rgb,
}

impl Material {
    pub fn lambert(name: &str, albedo: Rgb) -> Self {
        Self {
            name: name.into(),
            kind: MaterialKind::Lambert,
            color: albedo,
        }
    }

    pub fn mirror(name: &str, reflectance: Rgb) -> Self {
        Self {
            name: name.into(),
            kind: MaterialKind::Mirror,
            color: reflectance,
        }
    }

    pub fn emitter(name: &str, radiance: Rgb) -> Self {
        Self {
            name: name.into(),
            kind: MaterialKind::Emitter,
            color: radiance,
        }
    }

    #[inline]
    pub fn is_delta(&self) -> bool {
        self.kind == MaterialKind::Mirror
    }

    #[inline]
    pub fn is_emitter(&self) -> bool {
        self.kind == MaterialKind::Emitter
    }

    pub fn emission(&self) -> Rgb {
        if self.is_emitter() {
            self.color
        } else {
            Rgb::BLACK
        }
    }

    fn validate(&self) -> Result<()> {
        let c = self.color;
        if !c.is_finite() || c.min_channel() < 0.0 {
            return Err(Error::InvalidScene(format!(
                "material '{}' needs finite non-negative channels",
                self.name
            )));
        }
        if self.kind != MaterialKind::Emitter && c.max_channel() > 1.0 {
            return Err(Error::InvalidScene(format!(
                "material '{}' reflects more than it receives",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle {
    pub v: [Vec3; 3],
    /// Unit geometric normal, right-handed in vertex order.
    pub normal: Vec3,
    pub material: u32,
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3, material: u32) -> Self {
        let n = (b - a).cross(c - a);
        let len = n.length();
        let normal = if len > 0.0 { n / len } else { Vec3::Z };
        Self {
            v: [a, b, c],
            normal,
            material,
        }
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.v[1] - self.v[0]).cross(self.v[2] - self.v[0]).length()
    }

    /// Point at barycentric sample `(u1, u2)` using the square-root warp (uniform in area).
    pub fn sample_point(&self, u1: f64, u2: f64) -> Vec3 {
        let su = u1.sqrt();
        let b0 = 1.0 - su;
        let b1 = u2 * su;
        self.v[0] * b0 + self.v[1] * b1 + self.v[2] * (1.0 - b0 - b1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub position: Vec3,
    pub normal: Vec3,
    pub t: f64,
    pub material: u32,
    pub triangle: u32,
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub triangles: Vec<Triangle>,
    pub materials: Vec<Material>,
    pub camera: Camera,
    pub bounds: Aabb,
    /// Self-intersection distance, relative to the bounds diagonal.
    pub epsilon: f64,
    pub(crate) emitters: Vec<u32>,
    pub(crate) emitter_cdf: Vec<f64>,
    pub(crate) emitter_area: f64,
    bvh: Bvh,
}

impl Scene {
    pub fn new(triangles: Vec<Triangle>, materials: Vec<Material>, camera: Camera) -> Result<Self> {
        for m in &materials {
            m.validate()?;
        }
        let mut bounds = Aabb::EMPTY;
        for (i, t) in triangles.iter().enumerate() {
            if t.material as usize >= materials.len() {
                return Err(Error::InvalidScene(format!(
                    "triangle {i} references missing material {}",
                    t.material
                )));
            }
            for v in t.v {
                if !v.is_finite() {
                    return Err(Error::InvalidScene(format!("triangle {i} has a non-finite vertex")));
                }
                bounds.grow(v);
            }
        }
        let emitters: Vec<u32> = triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| materials[t.material as usize].is_emitter() && t.area() > 0.0)
            .map(|(i, _)| i as u32)
            .collect();
        if emitters.is_empty() {
            return Err(Error::InvalidScene("scene has no emitter".into()));
        }
        let mut emitter_cdf = Vec::with_capacity(emitters.len());
        let mut acc = 0.0;
        for &e in &emitters {
            acc += triangles[e as usize].area();
            emitter_cdf.push(acc);
        }
        let epsilon = 1e-4 * bounds.extent().length().max(1e-12);
        let bvh = Bvh::build(&triangles);
        Ok(Self {
            triangles,
            materials,
            camera,
            bounds,
            epsilon,
            emitters,
            emitter_cdf,
            emitter_area: acc,
            bvh,
        })
    }

    pub fn material(&self, id: u32) -> &Material {
        &self.materials[id as usize]
    }

    pub fn emitter_area(&self) -> f64 {
        self.emitter_area
    }

    pub fn emitter_triangles(&self) -> &[u32] {
        &self.emitters
    }

    /// Nearest hit beyond the self-intersection epsilon.
    pub fn intersect(&self, ray: &Ray) -> Option<Hit> {
        self.intersect_within(ray, f64::INFINITY)
    }

    pub fn intersect_within(&self, ray: &Ray, t_max: f64) -> Option<Hit> {
        self.bvh
            .intersect(&self.triangles, ray, self.epsilon, t_max)
            .map(|h| self.make_hit(ray, h))
    }

    /// Reference intersection testing every triangle.
    pub fn intersect_brute_force(&self, ray: &Ray) -> Option<Hit> {
        brute_force(&self.triangles, ray, self.epsilon, f64::INFINITY).map(|h| self.make_hit(ray, h))
    }

    /// True when nothing blocks the open segment from `p` to `q`.
    pub fn visible(&self, p: Vec3, q: Vec3) -> bool {
        let d = q - p;
        let dist = d.length();
        let ray = Ray::new(p, d / dist);
        self.bvh
            .intersect(&self.triangles, &ray, self.epsilon, dist - self.epsilon)
            .is_none()
    }

    fn make_hit(&self, ray: &Ray, h: RawHit) -> Hit {
        let tri = &self.triangles[h.triangle as usize];
        Hit {
            position: ray.at(h.t),
            normal: tri.normal,
            t: h.t,
            material: tri.material,
            triangle: h.triangle,
        }
    }

    /// Radiance emitted from `hit` back along `-dir` (front face only).
    pub fn emitted(&self, hit: &Hit, dir: Vec3) -> Rgb {
        let m = self.material(hit.material);
        if m.is_emitter() && hit.normal.dot(dir) < 0.0 {
            m.color
        } else {
            Rgb::BLACK
        }
    }
}
