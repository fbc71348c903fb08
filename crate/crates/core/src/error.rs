use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("morton coordinate out of range: ({x}, {y}, {z})")]
    MortonOverflow { x: u32, y: u32, z: u32 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("octree needs at least one voxel fragment")]
    EmptyOctree,

    #[error("position {0:?} lies outside the octree bounds")]
    OutOfBounds([f64; 3]),

    #[error("product guiding is undefined for delta materials")]
    DeltaMaterial,

    #[error("zero accumulated weight; nothing to resolve")]
    ZeroWeight,

    #[error("image size mismatch: {0}x{1} vs {2}x{3}")]
    ShapeMismatch(usize, usize, usize, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("image encoding failed: {0}")]
    Image(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
