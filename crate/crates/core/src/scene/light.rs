//! Next-event estimation by uniform sampling of the total emitter area.

use crate::math::{Rgb, Vec3};

use super::{Hit, Scene};

#[derive(Clone, Copy, Debug)]
pub struct NeeSample {
    /// Unit direction from the shading point towards the light sample.
    pub dir: Vec3,
    pub distance: f64,
    /// Density in solid angle at the shading point.
    pub pdf: f64,
    /// Radiance leaving the light sample towards the shading point (zero from the back face).
    pub emitted: Rgb,
    pub point: Vec3,
    pub triangle: u32,
}

pub fn sample_nee(scene: &Scene, p: Vec3, u1: f64, u2: f64) -> Option<NeeSample> {
    let total = scene.emitter_area;
    let target = u1 * total;
    let k = scene
        .emitter_cdf
        .partition_point(|&c| c <= target)
        .min(scene.emitters.len() - 1);
    let lo = if k == 0 { 0.0 } else { scene.emitter_cdf[k - 1] };
    let width = scene.emitter_cdf[k] - lo;
    let u1r = ((target - lo) / width).clamp(0.0, 1.0);
    let tri_id = scene.emitters[k];
    let tri = &scene.triangles[tri_id as usize];
    let point = tri.sample_point(u1r, u2);
    let d = point - p;
    let dist2 = d.length_squared();
    if dist2 <= 0.0 {
        return None;
    }
    let distance = dist2.sqrt();
    let dir = d / distance;
    let cos_light = -dir.dot(tri.normal);
    if cos_light.abs() < 1e-12 {
        return None;
    }
    let emitted = if cos_light > 0.0 {
        scene.material(tri.material).color
    } else {
        Rgb::BLACK
    };
    Some(NeeSample {
        dir,
        distance,
        pdf: dist2 / (total * cos_light.abs()),
        emitted,
        point,
        triangle: tri_id,
    })
}

/// Solid-angle density with which [`sample_nee`] would produce the emitter hit `light_hit` from `p`.
pub fn pdf_nee(scene: &Scene, p: Vec3, light_hit: &Hit) -> f64 {
    if !scene.material(light_hit.material).is_emitter() {
        return 0.0;
    }
    let d = light_hit.position - p;
    let dist2 = d.length_squared();
    let cos_light = (d.dot(light_hit.normal) / dist2.sqrt()).abs();
    if cos_light < 1e-12 {
        return 0.0;
    }
    dist2 / (scene.emitter_area * cos_light)
}
