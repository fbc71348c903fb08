//! 3D Morton codes, 21 bits per axis, `x` in the least-significant slot of each triple.

use crate::error::{Error, Result};

pub const MAX_COORD: u32 = 1 << 21;

#[inline]
fn spread(v: u64) -> u64 {
    let mut x = v & 0x1f_ffff;
    x = (x | x << 32) & 0x001f_0000_0000_ffff;
    x = (x | x << 16) & 0x001f_0000_ff00_00ff;
    x = (x | x << 8) & 0x100f_00f0_0f00_f00f;
    x = (x | x << 4) & 0x10c3_0c30_c30c_30c3;
    x = (x | x << 2) & 0x1249_2492_4924_9249;
    x
}

#[inline]
fn compact(v: u64) -> u32 {
    let mut x = v & 0x1249_2492_4924_9249;
    x = (x | x >> 2) & 0x10c3_0c30_c30c_30c3;
    x = (x | x >> 4) & 0x100f_00f0_0f00_f00f;
    x = (x | x >> 8) & 0x001f_0000_ff00_00ff;
    x = (x | x >> 16) & 0x001f_0000_0000_ffff;
    x = (x | x >> 32) & 0x1f_ffff;
    x as u32
}

/// Interleaves without range checks; callers guarantee coordinates below [`MAX_COORD`].
#[inline]
pub fn encode_unchecked(x: u32, y: u32, z: u32) -> u64 {
    spread(x as u64) | spread(y as u64) << 1 | spread(z as u64) << 2
}

pub fn morton_encode(x: u32, y: u32, z: u32) -> Result<u64> {
    if x >= MAX_COORD || y >= MAX_COORD || z >= MAX_COORD {
        return Err(Error::MortonOverflow { x, y, z });
    }
    Ok(encode_unchecked(x, y, z))
}

#[inline]
pub fn morton_decode(code: u64) -> (u32, u32, u32) {
    (compact(code), compact(code >> 1), compact(code >> 2))
}
