//! Python bindings: scene loading, rendering, octahedral and Morton maps,
//! and the tone-mapped error metrics.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use wfpg_core::accumulation::{self, AccumulationBuffer, HeuristicKind};
use wfpg_core::math::{Ray, Rgb, Vec3};
use wfpg_core::scene::Scene;
use wfpg_core::svo::SvoCache;
use wfpg_core::wavefront::{render_pt, GuidingConfig, RenderConfig, Renderer};

fn to_py(e: wfpg_core::Error) -> PyErr {
    match e {
        e @ wfpg_core::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

#[pyclass(name = "Scene", frozen, module = "wfpg")]
struct PyScene {
    inner: Scene,
}

#[pymethods]
impl PyScene {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: wfpg_core::scene::load_scene(path).map_err(to_py)?,
        })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.camera.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.camera.height
    }

    #[getter]
    fn triangle_count(&self) -> usize {
        self.inner.triangles.len()
    }

    #[getter]
    fn emitter_count(&self) -> usize {
        self.inner.emitter_triangles().len()
    }

    /// `(t, material name)` of the closest hit, or `None`.
    fn intersect(&self, origin: (f64, f64, f64), direction: (f64, f64, f64)) -> Option<(f64, String)> {
        let d = Vec3::new(direction.0, direction.1, direction.2).normalized();
        let ray = Ray::new(Vec3::new(origin.0, origin.1, origin.2), d);
        self.inner
            .intersect(&ray)
            .map(|h| (h.t, self.inner.material(h.material).name.clone()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Scene({} triangles, {}x{})",
            self.inner.triangles.len(),
            self.inner.camera.width,
            self.inner.camera.height
        )
    }
}

#[pyclass(name = "Frame", frozen, module = "wfpg")]
struct PyFrame {
    inner: accumulation::Frame,
}

#[pymethods]
impl PyFrame {
    #[getter]
    fn width(&self) -> usize {
        self.inner.width
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height
    }

    /// Row-major list of `(r, g, b)`.
    fn pixels(&self) -> Vec<(f64, f64, f64)> {
        self.inner.pixels.iter().map(|p| (p.r, p.g, p.b)).collect()
    }

    fn mean(&self) -> (f64, f64, f64) {
        let m = self.inner.mean();
        (m.r, m.g, m.b)
    }

    fn mse(&self, reference: &PyFrame) -> PyResult<f64> {
        accumulation::mse(&self.inner, &reference.inner).map_err(to_py)
    }

    fn mean_abs_diff(&self, reference: &PyFrame) -> PyResult<f64> {
        accumulation::mean_abs_diff(&self.inner, &reference.inner).map_err(to_py)
    }

    fn write_pfm(&self, path: &str) -> PyResult<()> {
        wfpg_core::image_io::write_pfm(path.as_ref(), &self.inner).map_err(to_py)
    }

    #[staticmethod]
    fn read_pfm(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: wfpg_core::image_io::read_pfm(path.as_ref()).map_err(to_py)?,
        })
    }
}

#[allow(clippy::too_many_arguments)]
fn config(depth: usize, seed: u64, guided_depths: usize, field_res: usize, lmin: u32, cray: u32, svo_res: u32, product: bool) -> PyResult<RenderConfig> {
    if !svo_res.is_power_of_two() || svo_res < 4 {
        return Err(PyValueError::new_err(format!("svo_res {svo_res} must be a power of two")));
    }
    if field_res < 8 || !field_res.is_multiple_of(8) {
        return Err(PyValueError::new_err(format!("field_res {field_res} must be a multiple of 8")));
    }
    Ok(RenderConfig {
        max_depth: depth,
        seed,
        guiding: GuidingConfig {
            l_min: lmin.min(svo_res.trailing_zeros().saturating_sub(1)),
            c_ray: cray.max(1),
            base_resolution: field_res,
            guided_depths: guided_depths.min(depth),
            product,
            ..GuidingConfig::default()
        },
        russian_roulette: false,
    })
}

/// Isolated frames, one per sample. `mode` is `pt`, `wfpg` or `wfpg-product`;
/// with `plain_first` the first guided sample is a plain path-traced one.
#[pyfunction]
#[pyo3(signature = (scene, spp, mode="wfpg", depth=8, seed=0, guided_depths=2, field_res=32, lmin=4, cray=32, svo_res=64, plain_first=true))]
#[allow(clippy::too_many_arguments)]
fn render_samples(
    py: Python<'_>,
    scene: &PyScene,
    spp: u64,
    mode: &str,
    depth: usize,
    seed: u64,
    guided_depths: usize,
    field_res: usize,
    lmin: u32,
    cray: u32,
    svo_res: u32,
    plain_first: bool,
) -> PyResult<Vec<PyFrame>> {
    let product = match mode {
        "pt" | "wfpg" => false,
        "wfpg-product" => true,
        other => return Err(PyValueError::new_err(format!("unknown mode '{other}'"))),
    };
    let cfg = config(depth, seed, guided_depths, field_res, lmin, cray, svo_res, product)?;
    let s = &scene.inner;
    let frames = py.detach(|| -> wfpg_core::Result<Vec<accumulation::Frame>> {
        if mode == "pt" {
            return Ok((1..=spp).map(|i| render_pt(s, &cfg, i)).collect());
        }
        let svo = SvoCache::from_scene(s, svo_res, seed)?;
        let mut r = Renderer::new(s, Some(svo), cfg);
        Ok((1..=spp).map(|i| r.render_sample(i, !(plain_first && i == 1))).collect())
    });
    Ok(frames.map_err(to_py)?.into_iter().map(|inner| PyFrame { inner }).collect())
}

/// Combines isolated frames with a named heuristic (`pt-first`, `linear`, ...).
#[pyfunction]
#[pyo3(signature = (frames, heuristic="pt-first"))]
fn accumulate(frames: Vec<PyRef<'_, PyFrame>>, heuristic: &str) -> PyResult<PyFrame> {
    let kind: HeuristicKind = heuristic.parse().map_err(PyValueError::new_err)?;
    let first = frames.first().ok_or_else(|| PyValueError::new_err("no frames"))?;
    let mut acc = AccumulationBuffer::new(first.inner.width, first.inner.height, kind);
    for f in &frames {
        acc.add_sample(&f.inner).map_err(to_py)?;
    }
    Ok(PyFrame {
        inner: acc.resolve().map_err(to_py)?,
    })
}

#[pyfunction]
fn octa_dir_to_uv(direction: (f64, f64, f64)) -> PyResult<(f64, f64)> {
    let d = Vec3::new(direction.0, direction.1, direction.2);
    let len = d.length();
    if len == 0.0 || !len.is_finite() {
        return Err(PyValueError::new_err("direction must be non-zero and finite"));
    }
    let g = wfpg_core::octa::octa_dir_to_uv(d * (1.0 / len));
    Ok((g.u, g.v))
}

#[pyfunction]
fn octa_uv_to_dir(u: f64, v: f64) -> (f64, f64, f64) {
    let d = wfpg_core::octa::octa_uv_to_dir(u, v);
    (d.x, d.y, d.z)
}

#[pyfunction]
fn morton_encode(x: u32, y: u32, z: u32) -> PyResult<u64> {
    wfpg_core::morton::morton_encode(x, y, z).map_err(to_py)
}

#[pyfunction]
fn morton_decode(code: u64) -> (u32, u32, u32) {
    wfpg_core::morton::morton_decode(code)
}

/// Reinhard `c / (1 + c)` applied per channel.
#[pyfunction]
fn tonemap(rgb: (f64, f64, f64)) -> (f64, f64, f64) {
    let p = Rgb::new(rgb.0, rgb.1, rgb.2).map(|c| c.max(0.0) / (1.0 + c.max(0.0)));
    (p.r, p.g, p.b)
}

#[pymodule]
fn wfpg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScene>()?;
    m.add_class::<PyFrame>()?;
    m.add_function(wrap_pyfunction!(render_samples, m)?)?;
    m.add_function(wrap_pyfunction!(accumulate, m)?)?;
    m.add_function(wrap_pyfunction!(octa_dir_to_uv, m)?)?;
    m.add_function(wrap_pyfunction!(octa_uv_to_dir, m)?)?;
    m.add_function(wrap_pyfunction!(morton_encode, m)?)?;
    m.add_function(wrap_pyfunction!(morton_decode, m)?)?;
    m.add_function(wrap_pyfunction!(tonemap, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
