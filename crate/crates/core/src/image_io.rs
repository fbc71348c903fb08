//! Portable float maps and tone-mapped PNGs.

use std::io::Write;
use std::path::Path;

use crate::accumulation::{tonemap_reinhard, Frame};
use crate::error::{Error, Result};
use crate::math::Rgb;

/// Encodes `frame` as a little-endian colour PFM (rows stored bottom to top).
pub fn encode_pfm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("PF\n{} {}\n-1.0\n", frame.width, frame.height).into_bytes();
    out.reserve(frame.pixels.len() * 12);
    for y in (0..frame.height).rev() {
        for x in 0..frame.width {
            for c in frame.get(x, y).to_array() {
                out.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
    }
    out
}

pub fn write_pfm(path: &Path, frame: &Frame) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_pfm(frame)).map_err(|e| Error::io(path, e))
}

pub fn decode_pfm(bytes: &[u8]) -> std::result::Result<Frame, String> {
    // header: three whitespace-terminated tokens, then exactly one whitespace byte
    let mut pos = 0;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        tokens.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| "bad header")?.to_string());
    }
    pos += 1;
    let channels = match tokens[0].as_str() {
        "PF" => 3,
        "Pf" => 1,
        t => return Err(format!("not a PFM (magic '{t}')")),
    };
    let w: usize = tokens[1].parse().map_err(|_| "bad width")?;
    let h: usize = tokens[2].parse().map_err(|_| "bad height")?;
    let scale: f64 = tokens[3].parse().map_err(|_| "bad scale")?;
    let little = scale < 0.0;
    let need = w * h * channels * 4;
    let data = bytes.get(pos..pos + need).ok_or("truncated pixel data")?;
    let mut pixels = vec![Rgb::BLACK; w * h];
    for (i, chunk) in data.chunks_exact(4 * channels).enumerate() {
        let val = |k: usize| {
            let b: [u8; 4] = chunk[4 * k..4 * k + 4].try_into().unwrap();
            (if little { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) }) as f64
        };
        let (x, row) = (i % w, i / w);
        let y = h - 1 - row;
        pixels[y * w + x] = if channels == 3 {
            Rgb::new(val(0), val(1), val(2))
        } else {
            Rgb::splat(val(0))
        };
    }
    Ok(Frame::new(w, h, pixels))
}

pub fn read_pfm(path: &Path) -> Result<Frame> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes).map_err(|msg| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg,
    })
}

fn srgb_encode(c: f64) -> u8 {
    let c = c.clamp(0.0, 1.0);
    let s = if c <= 0.003_130_8 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    };
    (s * 255.0 + 0.5) as u8
}

/// Tone-maps, sRGB-encodes and writes an 8-bit PNG.
pub fn write_png(path: &Path, frame: &Frame) -> Result<()> {
    let t = tonemap_reinhard(frame);
    write_png_ldr(path, &t)
}

/// Writes values already in `[0, 1]` without tone mapping.
pub fn write_png_ldr(path: &Path, frame: &Frame) -> Result<()> {
    let mut buf = Vec::with_capacity(frame.pixels.len() * 3);
    for p in &frame.pixels {
        for c in p.to_array() {
            buf.push(srgb_encode(c));
        }
    }
    image::save_buffer(path, &buf, frame.width as u32, frame.height as u32, image::ExtendedColorType::Rgb8)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}

/// Writes raw 8-bit RGB without any transfer curve (false-colour maps).
pub fn write_png_raw(path: &Path, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    image::save_buffer(path, rgb, width as u32, height as u32, image::ExtendedColorType::Rgb8)
        .map_err(|e| Error::Image(format!("{}: {e}", path.display())))
}
