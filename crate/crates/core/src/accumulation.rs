//! Weighted progressive accumulation, tone mapping and error metrics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::math::Rgb;

/// An RGB image, row-major with row 0 at the top.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<Rgb>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<Rgb>) -> Self {
        assert_eq!(pixels.len(), width * height);
        Self { width, height, pixels }
    }

    pub fn black(width: usize, height: usize) -> Self {
        Self::new(width, height, vec![Rgb::BLACK; width * height])
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn map(&self, f: impl Fn(Rgb) -> Rgb) -> Frame {
        Frame::new(self.width, self.height, self.pixels.iter().map(|&p| f(p)).collect())
    }

    pub fn mean(&self) -> Rgb {
        let s = self.pixels.iter().fold(Rgb::BLACK, |a, &b| a + b);
        s * (1.0 / self.pixels.len() as f64)
    }

    fn check_shape(&self, o: &Frame) -> Result<()> {
        if self.width != o.width || self.height != o.height {
            return Err(Error::ShapeMismatch(self.width, self.height, o.width, o.height));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HeuristicKind {
    Linear,
    Quadratic,
    OneTwo,
    DiscardFirst,
    Constant,
    PtFirst,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 6] = [
        HeuristicKind::Linear,
        HeuristicKind::Quadratic,
        HeuristicKind::OneTwo,
        HeuristicKind::DiscardFirst,
        HeuristicKind::Constant,
        HeuristicKind::PtFirst,
    ];

    /// Weight of sample `i` (1-based).
    pub fn weight(self, i: u64) -> f64 {
        match self {
            HeuristicKind::Linear => i.min(5) as f64,
            HeuristicKind::Quadratic => (i.min(5) * i.min(5)) as f64,
            HeuristicKind::OneTwo => {
                if i <= 1 {
                    1.0
                } else {
                    2.0
                }
            }
            HeuristicKind::DiscardFirst => {
                if i <= 1 {
                    0.0
                } else {
                    1.0
                }
            }
            HeuristicKind::Constant | HeuristicKind::PtFirst => 1.0,
        }
    }

    /// Whether sample `i` should be rendered without guiding.
    pub fn plain_sample(self, i: u64) -> bool {
        self == HeuristicKind::PtFirst && i == 1
    }

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::Linear => "linear",
            HeuristicKind::Quadratic => "quadratic",
            HeuristicKind::OneTwo => "one-two",
            HeuristicKind::DiscardFirst => "discard-first",
            HeuristicKind::Constant => "constant",
            HeuristicKind::PtFirst => "pt-first",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        HeuristicKind::ALL
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| format!("unknown heuristic '{s}'"))
    }
}

#[derive(Clone, Debug)]
pub struct AccumulationBuffer {
    width: usize,
    height: usize,
    sum: Vec<Rgb>,
    weight: f64,
    samples: u64,
    kind: HeuristicKind,
}

impl AccumulationBuffer {
    pub fn new(width: usize, height: usize, kind: HeuristicKind) -> Self {
        Self {
            width,
            height,
            sum: vec![Rgb::BLACK; width * height],
            weight: 0.0,
            samples: 0,
            kind,
        }
    }

    pub fn kind(&self) -> HeuristicKind {
        self.kind
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Adds the next sample with unit image weight.
    pub fn add_sample(&mut self, frame: &Frame) -> Result<()> {
        self.add_weighted(frame, 1.0)
    }

    /// Adds sample `i = samples + 1` scaled by `w_i * h(i)`.
    pub fn add_weighted(&mut self, frame: &Frame, w_i: f64) -> Result<()> {
        if frame.width != self.width || frame.height != self.height {
            return Err(Error::ShapeMismatch(self.width, self.height, frame.width, frame.height));
        }
        self.samples += 1;
        let w = w_i * self.kind.weight(self.samples);
        if w != 0.0 {
            for (s, &p) in self.sum.iter_mut().zip(&frame.pixels) {
                *s += p * w;
            }
        }
        self.weight += w;
        Ok(())
    }

    pub fn resolve(&self) -> Result<Frame> {
        if self.weight <= 0.0 {
            return Err(Error::ZeroWeight);
        }
        let inv = 1.0 / self.weight;
        Ok(Frame::new(self.width, self.height, self.sum.iter().map(|&s| s * inv).collect()))
    }
}

/// `c / (1 + c)` per channel.
pub fn tonemap_reinhard(frame: &Frame) -> Frame {
    frame.map(|p| p.map(|c| c.max(0.0) / (1.0 + c.max(0.0))))
}

/// Mean squared difference of tone-mapped values over pixels and channels.
pub fn mse(frame: &Frame, reference: &Frame) -> Result<f64> {
    frame.check_shape(reference)?;
    let (a, b) = (tonemap_reinhard(frame), tonemap_reinhard(reference));
    let s: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(x, y)| {
            let d = *x - *y;
            d.r * d.r + d.g * d.g + d.b * d.b
        })
        .sum();
    Ok(s / (3 * a.pixels.len()) as f64)
}

/// Mean absolute difference of tone-mapped values over pixels and channels.
pub fn mean_abs_diff(frame: &Frame, reference: &Frame) -> Result<f64> {
    frame.check_shape(reference)?;
    let (a, b) = (tonemap_reinhard(frame), tonemap_reinhard(reference));
    let s: f64 = a
        .pixels
        .iter()
        .zip(&b.pixels)
        .map(|(x, y)| {
            let d = *x - *y;
            d.r.abs() + d.g.abs() + d.b.abs()
        })
        .sum();
    Ok(s / (3 * a.pixels.len()) as f64)
}
