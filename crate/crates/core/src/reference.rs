//! Scalar path tracer used for reference fields and per-ray estimates.

use crate::guiding::{balance, shade_vertex, Vertex};
use crate::math::{Ray, Rgb};
use crate::octa::cell_direction;
use crate::rng::RngStream;
use crate::scene::pdf_nee;
use crate::scene::Scene;

/// Radiance arriving along `-ray.dir` at `ray.origin`, using at most `max_depth` segments.
pub fn incoming_radiance(scene: &Scene, ray: Ray, max_depth: usize, rng: &mut RngStream) -> Rgb {
    let mut ray = ray;
    let mut throughput = Rgb::WHITE;
    let mut radiance = Rgb::BLACK;
    let mut prev_pdf = 0.0;
    let mut prev_delta = true;
    for depth in 1..=max_depth {
        let Some(hit) = scene.intersect(&ray) else { break };
        let m = scene.material(hit.material);
        if m.is_emitter() {
            let le = scene.emitted(&hit, ray.dir);
            let w = if prev_delta {
                1.0
            } else {
                balance(prev_pdf, pdf_nee(scene, ray.origin, &hit))
            };
            radiance += throughput * le * w;
            break;
        }
        if depth == max_depth {
            break;
        }
        let wo = -ray.dir;
        let normal = if hit.normal.dot(wo) >= 0.0 { hit.normal } else { -hit.normal };
        let v = Vertex {
            position: hit.position,
            normal,
            wo,
            material: hit.material,
        };
        let s = shade_vertex(scene, &v, None, 0.0, rng);
        radiance += throughput * s.direct;
        let Some(c) = s.next else { break };
        throughput *= c.weight;
        prev_pdf = c.pdf;
        prev_delta = c.delta;
        ray = Ray::new(hit.position, c.wi);
    }
    radiance
}

/// Luminance of incoming radiance over an `n x n` octahedral grid at `origin`,
/// averaged over `samples_per_cell` uniformly placed directions per cell.
pub fn reference_field(
    scene: &Scene,
    origin: crate::math::Vec3,
    n: usize,
    samples_per_cell: usize,
    max_depth: usize,
    seed: u64,
) -> Vec<f64> {
    use rayon::prelude::*;
    (0..n * n)
        .into_par_iter()
        .map(|cell| {
            let mut rng = RngStream::new(seed, cell as u64, 0);
            let (col, row) = (cell % n, cell / n);
            let mut acc = 0.0;
            for _ in 0..samples_per_cell {
                let (a, b) = rng.next_2d();
                let dir = cell_direction(col, row, n, (a - 0.5, b - 0.5));
                acc += incoming_radiance(scene, Ray::new(origin, dir), max_depth, &mut rng).luminance();
            }
            acc / samples_per_cell as f64
        })
        .collect()
}
