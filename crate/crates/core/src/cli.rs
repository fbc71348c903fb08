//! Command-line configuration and the end-to-end render run.

use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use crate::accumulation::{mean_abs_diff, mse, AccumulationBuffer, Frame, HeuristicKind};
use crate::error::{Error, Result};
use crate::guiding::{generate_field, FieldParams};
use crate::image_io::{read_pfm, write_pfm, write_png, write_png_raw};
use crate::math::{Ray, Rgb};
use crate::reference::reference_field;
use crate::rng::{stream_id, RngStream};
use crate::scene::{load_scene, Scene};
use crate::svo::SvoCache;
use crate::wavefront::{DepthStats, GuidingConfig, RenderConfig, Renderer};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Pt,
    Wfpg,
    WfpgProduct,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Pt => "pt",
            Mode::Wfpg => "wfpg",
            Mode::WfpgProduct => "wfpg-product",
        }
    }
}

fn parse_heuristic(s: &str) -> std::result::Result<HeuristicKind, String> {
    s.parse()
}

fn parse_pixel(s: &str) -> std::result::Result<(usize, usize), String> {
    let (x, y) = s.split_once(',').ok_or("expected X,Y")?;
    Ok((
        x.trim().parse().map_err(|_| format!("bad x '{x}'"))?,
        y.trim().parse().map_err(|_| format!("bad y '{y}'"))?,
    ))
}

/// Wavefront path tracer with octree-based path guiding.
#[derive(Clone, Debug, PartialEq, Parser)]
#[command(name = "wfpg", version)]
pub struct RunConfig {
    /// Scene description (`wfpg-scene v1`).
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, value_enum, default_value = "wfpg")]
    pub mode: Mode,
    #[arg(long, default_value_t = 16)]
    pub spp: u32,
    /// Maximum number of path segments.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    #[arg(long = "guided-depths", default_value_t = 4)]
    pub guided_depths: usize,
    /// Radiance field resolution at the first guided depth.
    #[arg(long = "field-res", default_value_t = 128)]
    pub field_res: usize,
    #[arg(long, default_value_t = 5)]
    pub lmin: u32,
    #[arg(long, default_value_t = 512)]
    pub cray: u32,
    /// Leaf voxels per axis.
    #[arg(long = "svo-res", default_value_t = 256)]
    pub svo_res: u32,
    #[arg(long, default_value = "pt-first", value_parser = parse_heuristic)]
    pub heuristic: HeuristicKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Single worker, fully reproducible output.
    #[arg(long)]
    pub deterministic: bool,
    /// Output PFM; a tone-mapped PNG is written next to it.
    #[arg(long, default_value = "out.pfm")]
    pub out: PathBuf,
    /// Reference PFM for error metrics.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Write a false-colour map of first-bounce bins.
    #[arg(long = "dump-bins")]
    pub dump_bins: bool,
    /// Write the generated and a path-traced field at pixel X,Y.
    #[arg(long = "dump-field", value_parser = parse_pixel)]
    pub dump_field: Option<(usize, usize)>,
    #[arg(long, env = "WFPG_THREADS")]
    pub workers: Option<usize>,
}

impl RunConfig {
    /// Argument list that parses back to this configuration.
    pub fn to_args(&self) -> Vec<String> {
        let mut a = vec![
            "wfpg".to_string(),
            "--scene".into(),
            self.scene.display().to_string(),
            "--mode".into(),
            self.mode.name().into(),
            "--spp".into(),
            self.spp.to_string(),
            "--depth".into(),
            self.depth.to_string(),
            "--guided-depths".into(),
            self.guided_depths.to_string(),
            "--field-res".into(),
            self.field_res.to_string(),
            "--lmin".into(),
            self.lmin.to_string(),
            "--cray".into(),
            self.cray.to_string(),
            "--svo-res".into(),
            self.svo_res.to_string(),
            "--heuristic".into(),
            self.heuristic.name().into(),
            "--seed".into(),
            self.seed.to_string(),
            "--out".into(),
            self.out.display().to_string(),
        ];
        if self.deterministic {
            a.push("--deterministic".into());
        }
        if let Some(r) = &self.reference {
            a.push("--ref".into());
            a.push(r.display().to_string());
        }
        if self.dump_bins {
            a.push("--dump-bins".into());
        }
        if let Some((x, y)) = self.dump_field {
            a.push(format!("--dump-field={x},{y}"));
        }
        if let Some(w) = self.workers {
            a.push("--workers".into());
            a.push(w.to_string());
        }
        a
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.spp < 1 {
            return bad("spp must be at least 1".into());
        }
        if self.depth < 1 {
            return bad("depth must be at least 1".into());
        }
        if self.guided_depths > self.depth {
            return bad(format!("guided depths {} exceed max depth {}", self.guided_depths, self.depth));
        }
        if !self.svo_res.is_power_of_two() || !(16..=256).contains(&self.svo_res) {
            return bad(format!("svo resolution {} must be a power of two in 16..=256", self.svo_res));
        }
        if ![16, 32, 64, 128].contains(&self.field_res) {
            return bad(format!("field resolution {} must be one of 16, 32, 64, 128", self.field_res));
        }
        if self.cray < 1 {
            return bad("cray must be at least 1".into());
        }
        if self.workers == Some(0) {
            return bad("workers must be positive".into());
        }
        Ok(())
    }

    /// `l_min` clamped below the octree depth.
    pub fn effective_lmin(&self) -> u32 {
        let depth = self.svo_res.trailing_zeros();
        self.lmin.min(depth.saturating_sub(1))
    }

    pub fn render_config(&self) -> RenderConfig {
        RenderConfig {
            max_depth: self.depth,
            seed: self.seed,
            guiding: GuidingConfig {
                l_min: self.effective_lmin(),
                c_ray: self.cray,
                base_resolution: self.field_res,
                guided_depths: self.guided_depths,
                product: self.mode == Mode::WfpgProduct,
                ..GuidingConfig::default()
            },
            russian_roulette: false,
        }
    }

    pub fn png_path(&self) -> PathBuf {
        self.out.with_extension("png")
    }
}

/// `<out stem>.<tag>.<ext>` next to the main output.
pub fn sibling_path(out: &Path, tag: &str, ext: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    out.with_file_name(format!("{stem}.{tag}.{ext}"))
}

/// Colour for the `idx`-th bin of a false-colour map.
pub fn bin_color(idx: usize) -> [u8; 3] {
    let c = ((idx as u64 + 1).wrapping_mul(0x9E_3779)) & 0xFF_FFFF;
    [(c >> 16) as u8, (c >> 8) as u8, c as u8]
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub frame: Frame,
    pub mse: Option<f64>,
    pub mean_abs_diff: Option<f64>,
    pub depth_stats: Vec<DepthStats>,
    pub svo_nodes: usize,
    pub svo_bytes: usize,
    /// Number of regions in the bin map, when one was written.
    pub dumped_bins: Option<usize>,
    pub log: Vec<String>,
}

/// Runs a full render described by `cfg` and writes its artifacts.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let workers = if cfg.deterministic { Some(1) } else { cfg.workers };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run_inner(cfg))
}

fn run_inner(cfg: &RunConfig) -> Result<RunSummary> {
    let mut log = Vec::new();
    let mut note = |s: String| {
        log::info!("{s}");
        log.push(s);
    };
    note(format!("config: {}", cfg.to_args()[1..].join(" ")));
    let scene = load_scene(&cfg.scene)?;
    if let Some((x, y)) = cfg.dump_field {
        if x >= scene.camera.width || y >= scene.camera.height {
            return Err(Error::Config(format!("dump-field pixel ({x}, {y}) outside the image")));
        }
        if cfg.mode == Mode::Pt {
            return Err(Error::Config("dump-field needs a guided mode".into()));
        }
    }
    if cfg.effective_lmin() != cfg.lmin {
        note(format!("lmin lowered to {} for a depth-{} octree", cfg.effective_lmin(), cfg.svo_res.trailing_zeros()));
    }
    let svo = if cfg.mode == Mode::Pt {
        None
    } else {
        let svo = SvoCache::from_scene(&scene, cfg.svo_res, cfg.seed)?;
        note(format!(
            "svo: resolution {}^3, {} nodes, {} leaves, {} bytes",
            cfg.svo_res,
            svo.node_count(),
            svo.leaf_count(),
            svo.memory_bytes()
        ));
        Some(svo)
    };
    let (svo_nodes, svo_bytes) = svo.as_ref().map(|s| (s.node_count(), s.memory_bytes())).unwrap_or((0, 0));

    let mut renderer = Renderer::new(&scene, svo, cfg.render_config());
    let mut acc = AccumulationBuffer::new(scene.camera.width, scene.camera.height, cfg.heuristic);
    let mut bins_pending = cfg.dump_bins && cfg.mode != Mode::Pt;
    let mut dumped_bins = None;
    for i in 1..=cfg.spp as u64 {
        let guided = cfg.mode != Mode::Pt && !cfg.heuristic.plain_sample(i);
        renderer.record_bins(bins_pending && guided);
        let frame = renderer.render_sample(i, guided);
        acc.add_sample(&frame)?;
        if bins_pending && guided && cfg.guided_depths > 0 {
            let n = write_bin_map(cfg, &scene, renderer.bin_map())?;
            dumped_bins = Some(n);
            bins_pending = false;
        }
    }
    renderer.record_bins(false);
    for s in renderer.stats() {
        note(format!(
            "sample {} depth {}: {} bins, {:.1} rays/bin",
            s.sample,
            s.depth,
            s.bins,
            s.avg_rays_per_bin()
        ));
    }
    if let Some(n) = dumped_bins {
        note(format!("bin map: {n} bins at depth 1"));
    }

    let frame = acc.resolve()?;
    write_pfm(&cfg.out, &frame)?;
    write_png(&cfg.png_path(), &frame)?;

    let (mut m, mut d) = (None, None);
    if let Some(r) = &cfg.reference {
        let reference = read_pfm(r)?;
        m = Some(mse(&frame, &reference)?);
        d = Some(mean_abs_diff(&frame, &reference)?);
        note(format!("mse {:.6e}  mean |diff| {:.6e}", m.unwrap(), d.unwrap()));
    }
    if let Some(px) = cfg.dump_field {
        dump_field(cfg, &scene, renderer.svo().expect("guided mode has an octree"), px)?;
    }
    Ok(RunSummary {
        frame,
        mse: m,
        mean_abs_diff: d,
        depth_stats: renderer.stats().to_vec(),
        svo_nodes,
        svo_bytes,
        dumped_bins,
        log,
    })
}

fn write_bin_map(cfg: &RunConfig, scene: &Scene, map: &[Option<u32>]) -> Result<usize> {
    let mut nodes: Vec<u32> = map.iter().flatten().copied().collect();
    nodes.sort_unstable();
    nodes.dedup();
    let mut rgb = Vec::with_capacity(map.len() * 3);
    for b in map {
        match b {
            Some(node) => rgb.extend_from_slice(&bin_color(nodes.binary_search(node).unwrap())),
            None => rgb.extend_from_slice(&[0, 0, 0]),
        }
    }
    write_png_raw(&sibling_path(&cfg.out, "bins", "png"), scene.camera.width, scene.camera.height, &rgb)?;
    Ok(nodes.len())
}

/// Generated field and path-traced reference at the first hit seen through pixel `(x, y)`.
/// Both are written as PFMs scaled to a maximum of 1.
pub fn dump_field(cfg: &RunConfig, scene: &Scene, svo: &SvoCache, (x, y): (usize, usize)) -> Result<(Vec<f64>, Vec<f64>)> {
    let ray: Ray = scene.camera.generate_ray(x, y, 0.5, 0.5);
    let hit = scene
        .intersect(&ray)
        .ok_or_else(|| Error::Config(format!("pixel ({x}, {y}) sees no geometry")))?;
    let n = cfg.field_res;
    // cell centres, so the dump lines up with the reference grid
    let params = FieldParams {
        jitter: false,
        ..FieldParams::new(n)
    };
    let mut rng = RngStream::new(cfg.seed, stream_id(&[x as u64, y as u64]), 0);
    let field = generate_field(svo, scene, hit.position, &params, &mut rng).values;
    let reference = reference_field(scene, hit.position, n, 64, cfg.depth, cfg.seed);
    for (vals, tag) in [(&field, "field"), (&reference, "field_ref")] {
        write_pfm(&sibling_path(&cfg.out, tag, "pfm"), &normalized_frame(vals, n))?;
    }
    Ok((field, reference))
}

fn normalized_frame(vals: &[f64], n: usize) -> Frame {
    let max = vals.iter().cloned().fold(0.0, f64::max);
    let s = if max > 0.0 { 1.0 / max } else { 0.0 };
    Frame::new(n, n, vals.iter().map(|&v| Rgb::splat(v * s)).collect())
}
