//! Two-layer product guiding: an 8x8 layer of (block mean x BSDF) picks a
//! block of the radiance field, which is then sampled by its raw values.

use crate::error::{Error, Result};
use crate::math::{Vec3, FOUR_PI};
use crate::octa::{cell_direction, octa_dir_to_uv, octa_uv_to_dir};
use crate::scene::eval_bsdf;
use crate::scene::Material;

use super::distribution::Distribution2D;

pub const UPPER_RES: usize = 8;

/// Lower-layer data shared by every path of a bin.
#[derive(Clone, Debug)]
pub struct ProductBlocks {
    n: usize,
    block: usize,
    means: Vec<f64>,
    blocks: Vec<Distribution2D>,
}

impl ProductBlocks {
    pub fn new(values: &[f64], n: usize) -> Self {
        assert!(n >= UPPER_RES && n.is_multiple_of(UPPER_RES));
        let block = n / UPPER_RES;
        let mut means = Vec::with_capacity(UPPER_RES * UPPER_RES);
        let mut blocks = Vec::with_capacity(UPPER_RES * UPPER_RES);
        for br in 0..UPPER_RES {
            for bc in 0..UPPER_RES {
                let mut v = Vec::with_capacity(block * block);
                for r in 0..block {
                    let row = (br * block + r) * n + bc * block;
                    v.extend_from_slice(&values[row..row + block]);
                }
                means.push(v.iter().sum::<f64>() / (block * block) as f64);
                blocks.push(Distribution2D::new(v, block, block));
            }
        }
        Self { n, block, means, blocks }
    }

    /// Side length of a lower block in field cells.
    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn block_means(&self) -> &[f64] {
        &self.means
    }
}

#[derive(Clone, Debug)]
pub struct ProductHierarchy<'a> {
    blocks: &'a ProductBlocks,
    upper: Distribution2D,
}

/// Upper-layer weights: block mean times `f * max(0, cos)` at each 8x8 cell center.
pub fn product_upper_values(blocks: &ProductBlocks, material: &Material, wo: Vec3, normal: Vec3, epsilon: f64) -> Vec<f64> {
    let mut upper = vec![0.0; UPPER_RES * UPPER_RES];
    for r in 0..UPPER_RES {
        for c in 0..UPPER_RES {
            let d = cell_direction(c, r, UPPER_RES, (0.0, 0.0));
            let cos = d.dot(normal).max(0.0);
            let f = eval_bsdf(material, wo, d, normal).luminance();
            upper[r * UPPER_RES + c] = (blocks.means[r * UPPER_RES + c] * f * cos).max(epsilon);
        }
    }
    upper
}

pub fn build_product<'a>(blocks: &'a ProductBlocks, material: &Material, wo: Vec3, normal: Vec3, epsilon: f64) -> Result<ProductHierarchy<'a>> {
    if material.is_delta() || material.is_emitter() {
        return Err(Error::DeltaMaterial);
    }
    let upper = product_upper_values(blocks, material, wo, normal, epsilon);
    Ok(ProductHierarchy {
        blocks,
        upper: Distribution2D::new(upper, UPPER_RES, UPPER_RES),
    })
}

impl ProductHierarchy<'_> {
    pub fn upper(&self) -> &Distribution2D {
        &self.upper
    }

    /// Solid-angle density of a field cell.
    pub fn pdf_cell(&self, col: usize, row: usize) -> f64 {
        let b = self.blocks.block;
        let (uc, ur) = (col / b, row / b);
        let p_upper = self.upper.cell_probability(uc, ur);
        let block = &self.blocks.blocks[ur * UPPER_RES + uc];
        let p_block = block.cell_probability(col - uc * b, row - ur * b);
        let n = self.blocks.n;
        p_upper * p_block * (n * n) as f64 / FOUR_PI
    }

    pub fn pdf(&self, dir: Vec3) -> f64 {
        let (c, r) = octa_dir_to_uv(dir).cell(self.blocks.n);
        self.pdf_cell(c, r)
    }

    /// Stage one picks an upper cell with `(u1, u2)`, stage two a field cell in its block with `(u3, u4)`.
    pub fn sample(&self, u1: f64, u2: f64, u3: f64, u4: f64) -> (Vec3, f64) {
        let up = self.upper.sample(u1, u2);
        let block = &self.blocks.blocks[up.row * UPPER_RES + up.col];
        let s = block.sample(u3, u4);
        let b = self.blocks.block;
        let n = self.blocks.n as f64;
        let col = (up.col * b + s.col) as f64 + s.du;
        let row = (up.row * b + s.row) as f64 + s.dv;
        let dir = octa_uv_to_dir(col / n, row / n);
        (dir, self.pdf(dir))
    }
}
