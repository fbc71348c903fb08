//! Counter-based random streams.
//!
//! Every path owns a stream addressed by `(seed, stream id, counter)`. The
//! output only depends on that triple, so reordering paths between wavefront
//! phases never changes what a path draws.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Draws reserved per sample pass; stream counters start at `sample * SAMPLE_STRIDE`.
pub const SAMPLE_STRIDE: u64 = 1 << 32;

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    counter: u64,
    core: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64, counter: u64) -> Self {
        let mut core = ChaCha8Rng::seed_from_u64(seed);
        core.set_stream(stream);
        core.set_word_pos(word_pos(counter));
        Self {
            seed,
            stream,
            counter,
            core,
        }
    }

    /// Stream positioned at the start of sample pass `sample`.
    pub fn for_sample(seed: u64, stream: u64, sample: u64) -> Self {
        Self::new(seed, stream, sample.wrapping_mul(SAMPLE_STRIDE))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Uniform real in `[0, 1)`; advances the counter by one.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        let bits = self.core.next_u64();
        self.counter = self.counter.wrapping_add(1);
        if self.counter == 0 {
            self.core.set_word_pos(0);
        }
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[inline]
    pub fn next_2d(&mut self) -> (f64, f64) {
        let a = self.next_f64();
        (a, self.next_f64())
    }

    /// Uniform integer in `[0, n)`.
    pub fn next_index(&mut self, n: usize) -> usize {
        ((self.next_f64() * n as f64) as usize).min(n.saturating_sub(1))
    }
}

// one draw consumes two 32-bit ChaCha words
#[inline]
fn word_pos(counter: u64) -> u128 {
    counter as u128 * 2
}

/// Mixes a tuple of integers into a stream id (splitmix64 finalizer).
pub fn stream_id(parts: &[u64]) -> u64 {
    let mut h = 0x9E37_79B9_7F4A_7C15u64;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        h = (h ^ (h >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = (h ^ (h >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 31;
    }
    h
}
