//! Lambert, ideal mirror and (non-reflecting) emitter scattering.
//!
//! Directions point away from the surface. `normal` must be oriented
//! towards `wo`; callers flip the geometric normal for back-face hits.

use crate::math::{Rgb, Vec3, INV_PI, PI};

use super::{Material, MaterialKind};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BsdfSample {
    pub wi: Vec3,
    /// Solid-angle density; `1` by convention for delta lobes.
    pub pdf: f64,
    pub f: Rgb,
    pub delta: bool,
}

impl BsdfSample {
    /// `f * |cos| / pdf`, the throughput multiplier of this sample.
    pub fn weight(&self, normal: Vec3) -> Rgb {
        self.f * (self.wi.dot(normal).abs() / self.pdf)
    }
}

pub fn sample_bsdf(m: &Material, wo: Vec3, normal: Vec3, u1: f64, u2: f64) -> Option<BsdfSample> {
    match m.kind {
        MaterialKind::Lambert => {
            if wo.dot(normal) <= 0.0 {
                return None;
            }
            let wi = cosine_hemisphere(normal, u1, u2);
            let cos = wi.dot(normal);
            if cos <= 0.0 {
                return None;
            }
            Some(BsdfSample {
                wi,
                pdf: cos * INV_PI,
                f: m.color * INV_PI,
                delta: false,
            })
        }
        MaterialKind::Mirror => {
            let cos = wo.dot(normal);
            if cos <= 0.0 {
                return None;
            }
            Some(BsdfSample {
                wi: wo.reflect(normal),
                pdf: 1.0,
                f: m.color * (1.0 / cos),
                delta: true,
            })
        }
        MaterialKind::Emitter => None,
    }
}

/// Solid-angle density of sampling `wi`; zero for delta lobes and emitters.
pub fn pdf_bsdf(m: &Material, wo: Vec3, wi: Vec3, normal: Vec3) -> f64 {
    match m.kind {
        MaterialKind::Lambert if wo.dot(normal) > 0.0 => wi.dot(normal).max(0.0) * INV_PI,
        _ => 0.0,
    }
}

/// BSDF value for a non-delta pair of directions.
pub fn eval_bsdf(m: &Material, wo: Vec3, wi: Vec3, normal: Vec3) -> Rgb {
    match m.kind {
        MaterialKind::Lambert if wo.dot(normal) > 0.0 && wi.dot(normal) > 0.0 => m.color * INV_PI,
        _ => Rgb::BLACK,
    }
}

fn cosine_hemisphere(n: Vec3, u1: f64, u2: f64) -> Vec3 {
    let r = u1.sqrt();
    let phi = 2.0 * PI * u2;
    let (t, b) = n.basis();
    let z = (1.0 - u1).max(0.0).sqrt();
    (t * (r * phi.cos()) + b * (r * phi.sin()) + n * z).normalized()
}
