//! `wfpg-scene v1` text files and the OBJ subset they reference.
//!
//! ```text
//! wfpg-scene v1
//! camera eye 0.5 0.5 -1.4 target 0.5 0.5 0 up 0 1 0 fov 40 resolution 64 64
//! material white lambert 0.73 0.73 0.73
//! material light emitter 17 12 4
//! mesh walls.obj white
//! ```
//!
//! See `docs/FORMATS.md` for the full grammar.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::math::{Rgb, Vec3};

use super::{Camera, Material, Scene, Triangle};

pub const SCENE_HEADER: &str = "wfpg-scene v1";

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scene_str(&text, path, |mesh| {
        let p = base.join(mesh);
        std::fs::read_to_string(&p).map_err(|e| Error::io(p, e))
    })
}

/// Parses a scene document; `read_mesh` resolves mesh references to OBJ text.
pub fn parse_scene_str(
    text: &str,
    origin: &Path,
    mut read_mesh: impl FnMut(&str) -> Result<String>,
) -> Result<Scene> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, h)) if h == SCENE_HEADER => {}
        Some((n, h)) => return Err(err(n, format!("expected header '{SCENE_HEADER}', found '{h}'"))),
        None => return Err(err(0, "empty scene file".into())),
    }

    let mut camera = None;
    let mut materials: Vec<Material> = Vec::new();
    let mut by_name: HashMap<String, u32> = HashMap::new();
    let mut meshes: Vec<(usize, String, Option<String>)> = Vec::new();

    for (n, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "camera" => camera = Some(parse_camera(&toks[1..]).map_err(|m| err(n, m))?),
            "material" => {
                if toks.len() != 6 {
                    return Err(err(n, "usage: material NAME KIND R G B".into()));
                }
                let name = toks[1];
                let color = parse_rgb(&toks[3..6]).map_err(|m| err(n, m))?;
                let m = match toks[2] {
                    "lambert" => Material::lambert(name, color),
                    "mirror" => Material::mirror(name, color),
                    "emitter" => Material::emitter(name, color),
                    other => return Err(err(n, format!("unknown material kind '{other}'"))),
                };
                if by_name.insert(name.to_string(), materials.len() as u32).is_some() {
                    return Err(err(n, format!("material '{name}' defined twice")));
                }
                materials.push(m);
            }
            "mesh" => match toks.len() {
                2 => meshes.push((n, toks[1].to_string(), None)),
                3 => meshes.push((n, toks[1].to_string(), Some(toks[2].to_string()))),
                _ => return Err(err(n, "usage: mesh PATH [MATERIAL]".into())),
            },
            other => return Err(err(n, format!("unknown directive '{other}'"))),
        }
    }

    let camera = camera.ok_or_else(|| err(0, "missing camera".into()))?;
    let mut triangles = Vec::new();
    for (n, mesh, default_mat) in meshes {
        let default = match default_mat {
            Some(name) => Some(
                *by_name
                    .get(&name)
                    .ok_or_else(|| err(n, format!("unknown material '{name}'")))?,
            ),
            None => None,
        };
        let obj = read_mesh(&mesh)?;
        let obj_path = origin.with_file_name(&mesh);
        triangles.extend(parse_obj(&obj, &obj_path, default, &by_name)?);
    }
    Scene::new(triangles, materials, camera)
}

fn parse_camera(toks: &[&str]) -> std::result::Result<Camera, String> {
    let mut eye = None;
    let mut target = None;
    let mut up = Vec3::Y;
    let mut fov = None;
    let mut res = None;
    let mut i = 0;
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number '{s}'"));
    let vec = |t: &[&str]| -> std::result::Result<Vec3, String> {
        if t.len() < 3 {
            return Err("expected three numbers".into());
        }
        Ok(Vec3::new(num(t[0])?, num(t[1])?, num(t[2])?))
    };
    while i < toks.len() {
        match toks[i] {
            "eye" => {
                eye = Some(vec(&toks[i + 1..])?);
                i += 4;
            }
            "target" => {
                target = Some(vec(&toks[i + 1..])?);
                i += 4;
            }
            "up" => {
                up = vec(&toks[i + 1..])?;
                i += 4;
            }
            "fov" => {
                fov = Some(num(toks.get(i + 1).ok_or("fov needs a value")?)?);
                i += 2;
            }
            "resolution" => {
                let w: usize = toks
                    .get(i + 1)
                    .and_then(|s| s.parse().ok())
                    .ok_or("resolution needs W H")?;
                let h: usize = toks
                    .get(i + 2)
                    .and_then(|s| s.parse().ok())
                    .ok_or("resolution needs W H")?;
                if w == 0 || h == 0 {
                    return Err("resolution must be positive".into());
                }
                res = Some((w, h));
                i += 3;
            }
            other => return Err(format!("unknown camera key '{other}'")),
        }
    }
    let eye = eye.ok_or("camera needs eye")?;
    let target = target.ok_or("camera needs target")?;
    let fov = fov.ok_or("camera needs fov")?;
    let (w, h) = res.ok_or("camera needs resolution")?;
    if !(eye.is_finite() && target.is_finite() && up.is_finite()) || (target - eye).length() == 0.0 {
        return Err("degenerate camera frame".into());
    }
    if !(fov > 0.0 && fov < 180.0) {
        return Err("fov must lie in (0, 180)".into());
    }
    Ok(Camera::new(eye, target, up, fov, w, h))
}

fn parse_rgb(t: &[&str]) -> std::result::Result<Rgb, String> {
    let mut c = [0.0; 3];
    for (i, s) in t.iter().enumerate() {
        c[i] = s.parse().map_err(|_| format!("bad number '{s}'"))?;
    }
    Ok(Rgb::new(c[0], c[1], c[2]))
}

/// Positions and faces only; polygons are fan-triangulated and normals recomputed.
pub fn parse_obj(
    text: &str,
    path: &Path,
    default_material: Option<u32>,
    materials: &HashMap<String, u32>,
) -> Result<Vec<Triangle>> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        msg,
    };
    let mut verts: Vec<Vec3> = Vec::new();
    let mut tris = Vec::new();
    let mut current = default_material;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                let c: Vec<f64> = toks
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err(n, "bad vertex".into()))?;
                if c.len() != 3 {
                    return Err(err(n, "vertex needs three coordinates".into()));
                }
                let v = Vec3::new(c[0], c[1], c[2]);
                if !v.is_finite() {
                    return Err(err(n, "non-finite vertex".into()));
                }
                verts.push(v);
            }
            Some("f") => {
                let idx: Vec<usize> = toks
                    .map(|t| {
                        let first = t.split('/').next().unwrap_or("");
                        let k: i64 = first.parse().map_err(|_| err(n, format!("bad index '{t}'")))?;
                        let resolved = if k < 0 { verts.len() as i64 + k } else { k - 1 };
                        if resolved < 0 || resolved as usize >= verts.len() {
                            return Err(err(n, format!("index {k} out of range")));
                        }
                        Ok(resolved as usize)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(err(n, "face needs at least three vertices".into()));
                }
                let m = current.ok_or_else(|| err(n, "face without a material".into()))?;
                for k in 1..idx.len() - 1 {
                    tris.push(Triangle::new(verts[idx[0]], verts[idx[k]], verts[idx[k + 1]], m));
                }
            }
            Some("usemtl") => {
                let name = toks.next().ok_or_else(|| err(n, "usemtl needs a name".into()))?;
                current = Some(
                    *materials
                        .get(name)
                        .ok_or_else(|| err(n, format!("unknown material '{name}'")))?,
                );
            }
            _ => {}
        }
    }
    Ok(tris)
}
