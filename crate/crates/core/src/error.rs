use thiserror::Error;

use crate::dyadic::{Bitile, DyadicInterval, Tile};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("resolution {0} out of range (expected 1..={1})")]
    LevelsOutOfRange(u32, u32),

    #[error("Rademacher index {index} is not constant on cells of a 2^{levels} grid")]
    RademacherIndex { index: u32, levels: u32 },

    #[error("Walsh index {index} exceeds the 2^{levels} grid")]
    WalshIndex { index: u64, levels: u32 },

    #[error("tile {tile:?} is not representable on a 2^{levels} grid")]
    TileOutOfGrid { tile: Tile, levels: u32 },

    #[error("interval {interval:?} is not representable on a 2^{levels} grid")]
    IntervalOutOfGrid {
        interval: DyadicInterval,
        levels: u32,
    },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("resolution mismatch: {what} has 2^{found} cells, expected 2^{expected}")]
    ResolutionMismatch {
        what: &'static str,
        expected: u32,
        found: u32,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("partial-sum cutoff {n} outside 0..=2^{levels}")]
    CutoffOutOfRange { n: u64, levels: u32 },

    #[error("bitile {p:?} is not below {top:?} in the {order} order")]
    NotBelow {
        p: Bitile,
        top: Bitile,
        order: &'static str,
    },

    #[error("no sign given for interval {0:?}")]
    MissingSign(DyadicInterval),

    #[error("down-tile disjointness violated by {0:?} and {1:?}")]
    DisjointnessViolation(Bitile, Bitile),

    #[error("invalid norm: {0}")]
    InvalidNorm(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
