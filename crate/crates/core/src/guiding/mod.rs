//! Per-bin radiance fields, guided sampling and the MIS glue around them.

pub mod distribution;
pub mod field;
pub mod product;

pub use distribution::{build_distribution, CellSample, Distribution2D, GuidingDistribution};
pub use field::{generate_field, raw_field, FieldParams, RadianceField, DEFAULT_BLUR_SIGMA, DEFAULT_EPSILON};
pub use product::{build_product, product_upper_values, ProductBlocks, ProductHierarchy, UPPER_RES};

use crate::math::{Rgb, Vec3};
use crate::rng::RngStream;
use crate::scene::{eval_bsdf, pdf_bsdf, sample_bsdf};
use crate::scene::sample_nee;
use crate::scene::{Material, Scene};
use crate::svo::SvoCache;

/// Probability of drawing the continuation from the guide rather than the BSDF.
pub const DEFAULT_GUIDE_PROB: f64 = 0.5;

/// Uniformly chosen member position.
pub fn select_origin(positions: &[Vec3], rng: &mut RngStream) -> Vec3 {
    assert!(!positions.is_empty(), "empty bin");
    positions[rng.next_index(positions.len())]
}

/// Field data built once per bin.
#[derive(Clone, Debug)]
pub enum BinGuide {
    Field(GuidingDistribution),
    Product(ProductBlocks),
}

impl BinGuide {
    pub fn new(field: &RadianceField, product: bool) -> Self {
        if product {
            BinGuide::Product(ProductBlocks::new(&field.values, field.resolution))
        } else {
            BinGuide::Field(build_distribution(&field.values, field.resolution))
        }
    }

    /// Sampler for one vertex; `None` when the material cannot be guided.
    pub fn for_vertex(&self, material: &Material, wo: Vec3, normal: Vec3, epsilon: f64) -> Option<Guide<'_>> {
        if material.is_delta() || material.is_emitter() {
            return None;
        }
        match self {
            BinGuide::Field(d) => Some(Guide::Field(d)),
            BinGuide::Product(b) => build_product(b, material, wo, normal, epsilon).ok().map(Guide::Product),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Guide<'a> {
    Field(&'a GuidingDistribution),
    Product(ProductHierarchy<'a>),
}

impl Guide<'_> {
    pub fn pdf(&self, dir: Vec3) -> f64 {
        match self {
            Guide::Field(d) => d.pdf(dir),
            Guide::Product(p) => p.pdf(dir),
        }
    }

    /// Always consumes four numbers so both variants advance the stream alike.
    pub fn sample(&self, rng: &mut RngStream) -> (Vec3, f64) {
        let (u1, u2) = rng.next_2d();
        let (u3, u4) = rng.next_2d();
        match self {
            Guide::Field(d) => d.sample(u1, u2),
            Guide::Product(p) => p.sample(u1, u2, u3, u4),
        }
    }
}

/// Surface point being shaded. `normal` is the geometric normal flipped to the side of `wo`.
#[derive(Clone, Copy, Debug)]
pub struct Vertex {
    pub position: Vec3,
    pub normal: Vec3,
    pub wo: Vec3,
    pub material: u32,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Continuation {
    pub wi: Vec3,
    /// `f * |cos| / pdf`.
    pub weight: Rgb,
    /// Density the next vertex uses for MIS against light sampling.
    pub pdf: f64,
    pub delta: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shading {
    /// Light-sampling contribution, not yet multiplied by the path throughput.
    pub direct: Rgb,
    pub next: Option<Continuation>,
}

/// Combined continuation density: `p * guide + (1 - p) * bsdf`.
#[inline]
pub fn mixture_pdf(guide_prob: f64, p_guide: f64, p_bsdf: f64) -> f64 {
    guide_prob * p_guide + (1.0 - guide_prob) * p_bsdf
}

#[inline]
pub fn balance(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        a / (a + b)
    } else {
        0.0
    }
}

/// Light sampling plus continuation sampling at one vertex.
///
/// Without a guide this is plain BSDF sampling. With one, the continuation
/// is a one-sample mixture of guide and BSDF and both it and the light sample
/// are weighted with the balance heuristic against the mixture density.
pub fn shade_vertex(scene: &Scene, v: &Vertex, guide: Option<&Guide>, guide_prob: f64, rng: &mut RngStream) -> Shading {
    let m = scene.material(v.material);
    if m.is_emitter() {
        return Shading {
            direct: Rgb::BLACK,
            next: None,
        };
    }
    if m.is_delta() {
        let (u1, u2) = rng.next_2d();
        let next = sample_bsdf(m, v.wo, v.normal, u1, u2).map(|s| Continuation {
            wi: s.wi,
            weight: s.weight(v.normal),
            pdf: s.pdf,
            delta: true,
        });
        return Shading {
            direct: Rgb::BLACK,
            next,
        };
    }
    let cont_pdf = |wi: Vec3| {
        let pb = pdf_bsdf(m, v.wo, wi, v.normal);
        match guide {
            Some(g) => mixture_pdf(guide_prob, g.pdf(wi), pb),
            None => pb,
        }
    };

    let mut direct = Rgb::BLACK;
    let (u1, u2) = rng.next_2d();
    if let Some(s) = sample_nee(scene, v.position, u1, u2) {
        let cos = s.dir.dot(v.normal);
        if cos > 0.0 && !s.emitted.is_black() && scene.visible(v.position, s.point) {
            let f = eval_bsdf(m, v.wo, s.dir, v.normal);
            let w = balance(s.pdf, cont_pdf(s.dir));
            direct = f * s.emitted * (cos * w / s.pdf);
        }
    }

    let wi = match guide {
        Some(g) => {
            let pick = rng.next_f64();
            if pick < guide_prob {
                Some(g.sample(rng).0)
            } else {
                let (a, b) = rng.next_2d();
                sample_bsdf(m, v.wo, v.normal, a, b).map(|s| s.wi)
            }
        }
        None => {
            let (a, b) = rng.next_2d();
            sample_bsdf(m, v.wo, v.normal, a, b).map(|s| s.wi)
        }
    };
    let next = wi.and_then(|wi| {
        let f = eval_bsdf(m, v.wo, wi, v.normal);
        let pdf = cont_pdf(wi);
        if f.is_black() || pdf <= 0.0 {
            return None;
        }
        Some(Continuation {
            wi,
            weight: f * (wi.dot(v.normal).abs() / pdf),
            pdf,
            delta: false,
        })
    });
    Shading { direct, next }
}

/// Builds the field for a bin at a randomly chosen member position.
pub fn bin_field(svo: &SvoCache, scene: &Scene, positions: &[Vec3], params: &FieldParams, rng: &mut RngStream) -> RadianceField {
    let origin = select_origin(positions, rng);
    generate_field(svo, scene, origin, params, rng)
}

/// Shades every member of one bin with a shared field (the per-bin step of the guided depth loop).
#[allow(clippy::too_many_arguments)]
pub fn guide_rays(
    svo: &SvoCache,
    scene: &Scene,
    members: &[Vertex],
    rngs: &mut [RngStream],
    params: &FieldParams,
    product: bool,
    guide_prob: f64,
    bin_rng: &mut RngStream,
) -> Vec<Shading> {
    let positions: Vec<Vec3> = members.iter().map(|v| v.position).collect();
    let field = bin_field(svo, scene, &positions, params, bin_rng);
    let bg = BinGuide::new(&field, product);
    members
        .iter()
        .zip(rngs.iter_mut())
        .map(|(v, rng)| {
            let m = scene.material(v.material);
            let g = bg.for_vertex(m, v.wo, v.normal, params.epsilon);
            shade_vertex(scene, v, g.as_ref(), guide_prob, rng)
        })
        .collect()
}
