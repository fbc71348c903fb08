#![allow(dead_code)]

pub mod checks;

use std::path::{Path, PathBuf};

use wfpg_core::accumulation::{AccumulationBuffer, Frame, HeuristicKind};
use wfpg_core::image_io::{read_pfm, write_pfm};
use wfpg_core::scene::{load_scene, Scene};
use wfpg_core::svo::SvoCache;
use wfpg_core::wavefront::{render_pt, GuidingConfig, RenderConfig, Renderer};

pub fn asset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("assets").join(name)
}

pub fn scene(name: &str) -> Scene {
    load_scene(asset(name)).expect("bundled scene loads")
}

/// Guiding parameters scaled for a 64x64 desk render.
#[derive(Clone, Copy, Debug)]
pub struct Desk {
    pub svo_res: u32,
    pub field_res: usize,
    pub l_min: u32,
    pub c_ray: u32,
    pub guided_depths: usize,
    pub product: bool,
}

pub const DESK: Desk = Desk {
    svo_res: 64,
    field_res: 32,
    l_min: 4,
    c_ray: 32,
    guided_depths: 2,
    product: false,
};

impl Desk {
    pub fn render_config(&self, seed: u64) -> RenderConfig {
        RenderConfig {
            max_depth: 8,
            seed,
            guiding: GuidingConfig {
                l_min: self.l_min.min(self.svo_res.trailing_zeros() - 1),
                c_ray: self.c_ray,
                base_resolution: self.field_res,
                guided_depths: self.guided_depths,
                product: self.product,
                ..GuidingConfig::default()
            },
            russian_roulette: false,
        }
    }
}

/// Isolated per-sample frames of a guided run; sample 1 is plain when `plain_first`.
pub fn guided_frames(scene: &Scene, desk: &Desk, seed: u64, spp: u64, plain_first: bool) -> Vec<Frame> {
    let svo = SvoCache::from_scene(scene, desk.svo_res, seed).unwrap();
    let mut r = Renderer::new(scene, Some(svo), desk.render_config(seed));
    (1..=spp).map(|i| r.render_sample(i, !(plain_first && i == 1))).collect()
}

pub fn pt_frames(scene: &Scene, seed: u64, spp: u64) -> Vec<Frame> {
    let cfg = DESK.render_config(seed);
    (1..=spp).map(|i| render_pt(scene, &cfg, i)).collect()
}

pub fn accumulate(frames: &[Frame], kind: HeuristicKind) -> Frame {
    let f = &frames[0];
    let mut acc = AccumulationBuffer::new(f.width, f.height, kind);
    for fr in frames {
        acc.add_sample(fr).unwrap();
    }
    acc.resolve().unwrap()
}

/// Mean of `spp` PT samples, cached on disk between runs.
pub fn cached_pt(scene_name: &str, spp: u64, seed: u64) -> Frame {
    cached_pt_for(scene_name, &scene(scene_name), spp, seed)
}

pub fn cached_pt_for(tag: &str, scene: &Scene, spp: u64, seed: u64) -> Frame {
    let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("ref_{tag}_{spp}_{seed}.pfm"));
    if let Ok(f) = read_pfm(&path) {
        return f;
    }
    let frame = mean_pt(scene, spp, seed);
    write_pfm(&path, &frame).unwrap();
    frame
}

pub fn mean_pt(scene: &Scene, spp: u64, seed: u64) -> Frame {
    let cfg = DESK.render_config(seed);
    let (w, h) = (scene.camera.width, scene.camera.height);
    let mut sum = vec![wfpg_core::math::Rgb::BLACK; w * h];
    for i in 1..=spp {
        let f = render_pt(scene, &cfg, i);
        for (s, p) in sum.iter_mut().zip(&f.pixels) {
            *s += *p;
        }
    }
    Frame::new(w, h, sum.into_iter().map(|s| s * (1.0 / spp as f64)).collect())
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Two triangles `a b c` and `a c d`; the normal follows the winding.
pub fn quad(a: wfpg_core::math::Vec3, b: wfpg_core::math::Vec3, c: wfpg_core::math::Vec3, d: wfpg_core::math::Vec3, material: u32) -> [wfpg_core::scene::Triangle; 2] {
    use wfpg_core::scene::Triangle;
    [Triangle::new(a, b, c, material), Triangle::new(a, c, d, material)]
}

/// Axis-aligned box whose faces all point inwards.
pub fn inward_box(min: wfpg_core::math::Vec3, max: wfpg_core::math::Vec3, material: u32) -> Vec<wfpg_core::scene::Triangle> {
    use wfpg_core::math::Vec3;
    let p = |x: usize, y: usize, z: usize| {
        Vec3::new(if x == 0 { min.x } else { max.x }, if y == 0 { min.y } else { max.y }, if z == 0 { min.z } else { max.z })
    };
    let faces = [
        [p(0, 0, 0), p(1, 0, 0), p(1, 0, 1), p(0, 0, 1)],
        [p(0, 1, 0), p(1, 1, 0), p(1, 1, 1), p(0, 1, 1)],
        [p(0, 0, 0), p(0, 1, 0), p(0, 1, 1), p(0, 0, 1)],
        [p(1, 0, 0), p(1, 1, 0), p(1, 1, 1), p(1, 0, 1)],
        [p(0, 0, 0), p(1, 0, 0), p(1, 1, 0), p(0, 1, 0)],
        [p(0, 0, 1), p(1, 0, 1), p(1, 1, 1), p(0, 1, 1)],
    ];
    let center = (min + max) * 0.5;
    let mut t = Vec::new();
    for [a, b, c, d] in faces {
        let q = quad(a, b, c, d, material);
        if q[0].normal.dot(center - a) > 0.0 {
            t.extend(q);
        } else {
            t.extend(quad(a, d, c, b, material));
        }
    }
    t
}

pub fn camera(eye: wfpg_core::math::Vec3, target: wfpg_core::math::Vec3, size: usize) -> wfpg_core::scene::Camera {
    wfpg_core::scene::Camera::new(eye, target, wfpg_core::math::Vec3::Y, 40.0, size, size)
}
