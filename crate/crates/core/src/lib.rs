//! Wavefront path tracing with path guiding from a sparse voxel octree of
//! cached radiant exitance.
//!
//! The renderer advances every path one bounce at a time. At guided depths,
//! path vertices are binned by octree node, each bin cone-traces an incoming
//! radiance field from the octree, and continuation directions are sampled
//! from that field (optionally multiplied by the BSDF) in a one-sample MIS
//! mixture with BSDF sampling. Paths that reach an emitter push their radiance
//! back into the octree so later samples are guided better.

pub mod accumulation;
pub mod blur;
pub mod cli;
pub mod error;
pub mod guiding;
pub mod image_io;
pub mod math;
pub mod morton;
pub mod octa;
pub mod reference;
pub mod rng;
pub mod scene;
pub mod svo;
pub mod wavefront;

pub use error::{Error, Result};
