//! Depth-synchronized render loop.
//!
//! Every sample pass advances all camera paths one bounce at a time. After
//! intersection, live vertices at guided depths are binned over the octree,
//! each bin generates one radiance field, and its members sample their
//! continuation from it. When the pass ends, paths that reached an emitter
//! feed their radiance back into the octree.

mod partition;
mod paths;

pub use partition::{partition_material, partition_spatial, SpatialBin};
pub use paths::{exitance_deposits, update_exitance, Deposit, PathBuffer};

use rayon::prelude::*;

use crate::accumulation::Frame;
use crate::guiding::{
    bin_field, shade_vertex, BinGuide, FieldParams, Shading, Vertex, DEFAULT_BLUR_SIGMA, DEFAULT_EPSILON,
    DEFAULT_GUIDE_PROB,
};
use crate::math::{Ray, Rgb, Vec3};
use crate::rng::{stream_id, RngStream};
use crate::scene::pdf_nee;
use crate::scene::{Hit, Scene};
use crate::svo::SvoCache;

#[derive(Clone, Debug, PartialEq)]
pub struct GuidingConfig {
    pub l_min: u32,
    pub c_ray: u32,
    /// Field resolution at the first guided depth; halved per further depth.
    pub base_resolution: usize,
    pub guided_depths: usize,
    pub product: bool,
    pub jitter: bool,
    pub blur_sigma: f64,
    pub epsilon: f64,
    pub guide_prob: f64,
}

impl Default for GuidingConfig {
    fn default() -> Self {
        Self {
            l_min: 5,
            c_ray: 512,
            base_resolution: 128,
            guided_depths: 4,
            product: false,
            jitter: true,
            blur_sigma: DEFAULT_BLUR_SIGMA,
            epsilon: DEFAULT_EPSILON,
            guide_prob: DEFAULT_GUIDE_PROB,
        }
    }
}

impl GuidingConfig {
    /// Field resolution used at `depth` (1-based), never below 8.
    pub fn resolution_at(&self, depth: usize) -> usize {
        (self.base_resolution >> (depth.saturating_sub(1)).min(16)).max(8)
    }

    pub fn field_params(&self, depth: usize) -> FieldParams {
        FieldParams {
            resolution: self.resolution_at(depth),
            jitter: self.jitter,
            blur_sigma: self.blur_sigma,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderConfig {
    /// Maximum number of path segments.
    pub max_depth: usize,
    pub seed: u64,
    pub guiding: GuidingConfig,
    pub russian_roulette: bool,
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self {
            max_depth: 8,
            seed: 0,
            guiding: GuidingConfig::default(),
            russian_roulette: false,
        }
    }
}

/// Binning statistics of one guided depth.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DepthStats {
    pub sample: u64,
    pub depth: usize,
    pub bins: usize,
    pub rays: usize,
}

impl DepthStats {
    pub fn avg_rays_per_bin(&self) -> f64 {
        if self.bins == 0 {
            0.0
        } else {
            self.rays as f64 / self.bins as f64
        }
    }
}

#[derive(Clone)]
struct PathState {
    rng: RngStream,
    ray: Ray,
    throughput: Rgb,
    prev_pdf: f64,
    prev_delta: bool,
    alive: bool,
}

pub struct Renderer<'s> {
    scene: &'s Scene,
    svo: Option<SvoCache>,
    cfg: RenderConfig,
    stats: Vec<DepthStats>,
    record_bins: bool,
    bin_map: Vec<Option<u32>>,
}

impl<'s> Renderer<'s> {
    pub fn new(scene: &'s Scene, svo: Option<SvoCache>, cfg: RenderConfig) -> Self {
        Self {
            scene,
            svo,
            cfg,
            stats: Vec::new(),
            record_bins: false,
            bin_map: Vec::new(),
        }
    }

    pub fn config(&self) -> &RenderConfig {
        &self.cfg
    }

    pub fn svo(&self) -> Option<&SvoCache> {
        self.svo.as_ref()
    }

    pub fn svo_mut(&mut self) -> Option<&mut SvoCache> {
        self.svo.as_mut()
    }

    pub fn stats(&self) -> &[DepthStats] {
        &self.stats
    }

    /// Remember which bin every pixel's first vertex joined in the next guided pass.
    pub fn record_bins(&mut self, on: bool) {
        self.record_bins = on;
    }

    /// Per-pixel bin node of the last recorded pass.
    pub fn bin_map(&self) -> &[Option<u32>] {
        &self.bin_map
    }

    /// One sample per pixel, then learning from it when an octree is present.
    pub fn render_sample(&mut self, sample: u64, guided: bool) -> Frame {
        let (frame, paths) = self.trace_sample(sample, guided);
        self.learn(&paths);
        frame
    }

    pub fn learn(&mut self, paths: &PathBuffer) {
        if let Some(svo) = self.svo.as_mut() {
            update_exitance(paths, svo);
            svo.propagate_up();
        }
    }

    /// Traces one sample pass without touching the cache.
    pub fn trace_sample(&mut self, sample: u64, guided: bool) -> (Frame, PathBuffer) {
        let scene = self.scene;
        let cam = &scene.camera;
        let (w, h) = (cam.width, cam.height);
        let n_paths = w * h;
        let max_depth = self.cfg.max_depth.max(1);
        let seed = self.cfg.seed;
        let mut buf = PathBuffer::new(n_paths, max_depth);

        let mut states: Vec<PathState> = (0..n_paths)
            .into_par_iter()
            .map(|p| {
                let mut rng = RngStream::for_sample(seed, p as u64, sample);
                let (jx, jy) = rng.next_2d();
                let ray = cam.generate_ray(p % w, p / w, jx, jy);
                PathState {
                    rng,
                    ray,
                    throughput: Rgb::WHITE,
                    prev_pdf: 0.0,
                    prev_delta: true,
                    alive: true,
                }
            })
            .collect();
        for p in 0..n_paths {
            buf.record(p, 0, cam.position, Rgb::WHITE);
        }
        if self.record_bins && guided {
            self.bin_map = vec![None; n_paths];
        }

        let mut active: Vec<u32> = (0..n_paths as u32).collect();
        for depth in 1..=max_depth {
            if active.is_empty() {
                break;
            }
            let hits: Vec<Option<Hit>> = active
                .par_iter()
                .map(|&p| scene.intersect(&states[p as usize].ray))
                .collect();

            let mut shading: Vec<(u32, Vertex)> = Vec::with_capacity(active.len());
            for (&p, hit) in active.iter().zip(hits) {
                let st = &mut states[p as usize];
                let Some(hit) = hit else {
                    st.alive = false;
                    continue;
                };
                buf.record(p as usize, depth, hit.position, st.throughput);
                let m = scene.material(hit.material);
                if m.is_emitter() {
                    let le = scene.emitted(&hit, st.ray.dir);
                    if !le.is_black() {
                        let w = if st.prev_delta {
                            1.0
                        } else {
                            let prev = buf.position(p as usize, depth - 1);
                            crate::guiding::balance(st.prev_pdf, pdf_nee(scene, prev, &hit))
                        };
                        buf.radiance[p as usize] += st.throughput * le * w;
                        buf.emitted[p as usize] = le;
                    }
                    st.alive = false;
                    continue;
                }
                if depth == max_depth {
                    st.alive = false;
                    continue;
                }
                let wo = -st.ray.dir;
                let normal = if hit.normal.dot(wo) >= 0.0 { hit.normal } else { -hit.normal };
                shading.push((
                    p,
                    Vertex {
                        position: hit.position,
                        normal,
                        wo,
                        material: hit.material,
                    },
                ));
            }

            let guide_here = guided && depth <= self.cfg.guiding.guided_depths && self.svo.is_some();
            let results: Vec<(u32, Shading, RngStream)> = if guide_here {
                self.shade_guided(&shading, &states, sample, depth)
            } else {
                shade_plain(scene, &shading, &states)
            };

            let mut next_active = Vec::with_capacity(results.len());
            for (p, s, rng) in results {
                let st = &mut states[p as usize];
                st.rng = rng;
                buf.radiance[p as usize] += st.throughput * s.direct;
                match s.next {
                    Some(c) => {
                        st.throughput *= c.weight;
                        let origin = buf.position(p as usize, depth);
                        st.ray = Ray::new(origin, c.wi);
                        st.prev_pdf = c.pdf;
                        st.prev_delta = c.delta;
                        if self.cfg.russian_roulette && depth >= 3 {
                            let q = st.throughput.max_channel().min(0.95);
                            if st.rng.next_f64() >= q {
                                st.alive = false;
                                continue;
                            }
                            st.throughput *= 1.0 / q;
                        }
                        if st.throughput.is_black() {
                            st.alive = false;
                        } else {
                            next_active.push(p);
                        }
                    }
                    None => st.alive = false,
                }
            }
            active = next_active;
        }

        let mut pixels = vec![Rgb::BLACK; n_paths];
        for p in 0..n_paths {
            pixels[buf.pixel[p] as usize] = buf.radiance[p];
        }
        (Frame::new(w, h, pixels), buf)
    }

    fn shade_guided(&mut self, shading: &[(u32, Vertex)], states: &[PathState], sample: u64, depth: usize) -> Vec<(u32, Shading, RngStream)> {
        let scene = self.scene;
        let svo = self.svo.as_ref().expect("guided depth without octree");
        let gcfg = &self.cfg.guiding;

        // vertices that can be guided: non-delta surface inside a materialized leaf
        let mut leaves = Vec::new();
        let mut guided_idx = Vec::new();
        let mut plain = Vec::new();
        for (i, (_, v)) in shading.iter().enumerate() {
            let m = scene.material(v.material);
            let leaf = if m.is_delta() { None } else { svo.descend_leaf(v.position).ok().flatten() };
            match leaf {
                Some(l) => {
                    leaves.push(l);
                    guided_idx.push(i);
                }
                None => plain.push(shading[i]),
            }
        }
        let bins = partition_spatial(&leaves, svo, gcfg.l_min, gcfg.c_ray);
        self.stats.push(DepthStats {
            sample,
            depth,
            bins: bins.len(),
            rays: leaves.len(),
        });
        if self.record_bins && depth == 1 {
            for b in &bins {
                for &m in &b.members {
                    let p = shading[guided_idx[m as usize]].0;
                    self.bin_map[p as usize] = Some(b.node);
                }
            }
        }

        let params = gcfg.field_params(depth);
        let seed = self.cfg.seed;
        let mut out: Vec<(u32, Shading, RngStream)> = bins
            .par_iter()
            .flat_map_iter(|b| {
                let members: Vec<(u32, Vertex)> = b.members.iter().map(|&m| shading[guided_idx[m as usize]]).collect();
                let positions: Vec<Vec3> = members.iter().map(|(_, v)| v.position).collect();
                let mut bin_rng = RngStream::new(seed, stream_id(&[sample, depth as u64, b.node as u64]), 0);
                let field = bin_field(svo, scene, &positions, &params, &mut bin_rng);
                let bg = BinGuide::new(&field, gcfg.product);
                members
                    .into_iter()
                    .map(|(p, v)| {
                        let mut rng = states[p as usize].rng.clone();
                        let m = scene.material(v.material);
                        let g = bg.for_vertex(m, v.wo, v.normal, gcfg.epsilon);
                        let s = shade_vertex(scene, &v, g.as_ref(), gcfg.guide_prob, &mut rng);
                        (p, s, rng)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        out.extend(shade_plain(scene, &plain, states));
        out.sort_by_key(|r| r.0);
        out
    }
}

fn shade_plain(scene: &Scene, shading: &[(u32, Vertex)], states: &[PathState]) -> Vec<(u32, Shading, RngStream)> {
    let materials: Vec<u32> = shading.iter().map(|(_, v)| v.material).collect();
    let groups = partition_material(&materials);
    let mut out: Vec<(u32, Shading, RngStream)> = groups
        .par_iter()
        .flat_map_iter(|(_, members)| {
            members.iter().map(|&i| {
                let (p, v) = shading[i as usize];
                let mut rng = states[p as usize].rng.clone();
                let s = shade_vertex(scene, &v, None, 0.0, &mut rng);
                (p, s, rng)
            })
        })
        .collect();
    out.sort_by_key(|r| r.0);
    out
}

/// Plain path tracing of one pixel sample; the same estimator as a pass with guiding disabled.
pub fn render_pt(scene: &Scene, cfg: &RenderConfig, sample: u64) -> Frame {
    Renderer::new(scene, None, cfg.clone()).render_sample(sample, false)
}
