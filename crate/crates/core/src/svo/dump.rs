//! Binary debug dump of an [`SvoCache`]. Layout is described in `docs/FORMATS.md`.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::math::{Rgb, Vec3};

use super::{Side, SvoCache, SvoNode, VoxelGrid};

pub const SVO_MAGIC: [u8; 4] = *b"WSVO";
pub const SVO_VERSION: u32 = 1;
pub const NODE_RECORD_BYTES: usize = 64;

pub fn write_svo_dump(svo: &SvoCache, mut w: impl Write) -> std::io::Result<()> {
    let g = svo.grid();
    w.write_all(&SVO_MAGIC)?;
    w.write_all(&SVO_VERSION.to_le_bytes())?;
    w.write_all(&g.resolution.to_le_bytes())?;
    w.write_all(&(svo.node_count() as u32).to_le_bytes())?;
    w.write_all(&svo.depth().to_le_bytes())?;
    for a in 0..3 {
        w.write_all(&g.origin[a].to_le_bytes())?;
    }
    w.write_all(&g.side.to_le_bytes())?;
    let mut rec = Vec::with_capacity(NODE_RECORD_BYTES);
    for n in svo.nodes() {
        rec.clear();
        rec.push(n.level);
        rec.push(n.child_mask);
        rec.extend_from_slice(&[0, 0]);
        rec.extend_from_slice(&n.code.to_le_bytes());
        rec.extend_from_slice(&n.first_child.to_le_bytes());
        rec.extend_from_slice(&n.parent.to_le_bytes());
        for a in 0..3 {
            rec.extend_from_slice(&(n.normal[a] as f32).to_le_bytes());
        }
        for side in [Side::A, Side::B] {
            for c in n.exitance(side).to_array() {
                rec.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        for wt in n.weight {
            rec.extend_from_slice(&(wt as f32).to_le_bytes());
        }
        debug_assert_eq!(rec.len(), NODE_RECORD_BYTES);
        w.write_all(&rec)?;
    }
    Ok(())
}

/// Reads a dump back. Values come back at `f32` precision.
pub fn read_svo_dump(path: &Path) -> Result<SvoCache> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: msg.to_string(),
    };
    let mut cur = Cursor { b: &bytes, pos: 0 };
    if cur.take(4).ok_or_else(|| bad("truncated header"))? != SVO_MAGIC {
        return Err(bad("bad magic"));
    }
    let version = cur.u32().ok_or_else(|| bad("truncated header"))?;
    if version != SVO_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let resolution = cur.u32().ok_or_else(|| bad("truncated header"))?;
    let count = cur.u32().ok_or_else(|| bad("truncated header"))? as usize;
    let depth = cur.u32().ok_or_else(|| bad("truncated header"))?;
    let mut o = [0.0; 3];
    for v in &mut o {
        *v = cur.f64().ok_or_else(|| bad("truncated header"))?;
    }
    let side = cur.f64().ok_or_else(|| bad("truncated header"))?;
    if bytes.len() - cur.pos != count * NODE_RECORD_BYTES {
        return Err(bad("node count does not match file size"));
    }
    let mut nodes = Vec::with_capacity(count);
    let mut level_offsets = vec![0usize; depth as usize + 2];
    for _ in 0..count {
        let r = cur.take(NODE_RECORD_BYTES).unwrap();
        let f = |i: usize| f32::from_le_bytes(r[i..i + 4].try_into().unwrap()) as f64;
        let u = |i: usize| u32::from_le_bytes(r[i..i + 4].try_into().unwrap());
        let level = r[0];
        if level as u32 > depth {
            return Err(bad("node level exceeds depth"));
        }
        let mask = r[1];
        let ex = [Rgb::new(f(32), f(36), f(40)), Rgb::new(f(44), f(48), f(52))];
        let weight = [f(56), f(60)];
        let (sum, mean) = if mask == 0 {
            ([ex[0] * weight[0], ex[1] * weight[1]], [Rgb::BLACK; 2])
        } else {
            ([Rgb::BLACK; 2], ex)
        };
        level_offsets[level as usize + 1] += 1;
        nodes.push(SvoNode {
            level,
            code: u64::from_le_bytes(r[4..12].try_into().unwrap()),
            child_mask: mask,
            first_child: u(12),
            parent: u(16),
            normal: Vec3::new(f(20), f(24), f(28)),
            sum,
            weight,
            mean,
        });
    }
    for l in 1..level_offsets.len() {
        level_offsets[l] += level_offsets[l - 1];
    }
    let grid = VoxelGrid {
        origin: Vec3::new(o[0], o[1], o[2]),
        side,
        resolution,
    };
    Ok(SvoCache::from_parts(nodes, level_offsets, depth, grid))
}

struct Cursor<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.b.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }
    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }
    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }
}
