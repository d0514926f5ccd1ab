//! Integer-indexed dyadic geometry of the phase plane `[0,1) × [0,∞)`.
//!
//! A dyadic interval at scale `k` has length `2^-k`, so every tile over it
//! has a frequency interval of length `2^k` with integer endpoints. All
//! comparisons below are shifts and equality tests on integers.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::number::Dyadic;

/// Largest resolution exponent accepted by [`BitileUniverse::new`].
pub const MAX_LEVELS: u32 = 20;

/// `[pos·2^-k, (pos+1)·2^-k)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub k: u32,
    pub pos: u64,
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I({}, {})", self.k, self.pos)
    }
}

impl DyadicInterval {
    pub const UNIT: DyadicInterval = DyadicInterval { k: 0, pos: 0 };

    pub const fn new(k: u32, pos: u64) -> Self {
        DyadicInterval { k, pos }
    }

    /// The grid cell `j` of a `2^levels` grid.
    pub const fn cell(levels: u32, j: usize) -> Self {
        DyadicInterval {
            k: levels,
            pos: j as u64,
        }
    }

    pub fn in_unit(&self) -> bool {
        self.k >= 64 || self.pos < (1u64 << self.k)
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.k >= self.k && shr(other.pos, other.k - self.k) == self.pos
    }

    pub fn strictly_contains(&self, other: &DyadicInterval) -> bool {
        other.k > self.k && self.contains(other)
    }

    pub fn intersects(&self, other: &DyadicInterval) -> bool {
        self.contains(other) || other.contains(self)
    }

    pub fn len(&self) -> Dyadic {
        Dyadic::pow2(-(self.k as i32))
    }

    pub fn parent(&self) -> Option<DyadicInterval> {
        (self.k > 0).then(|| DyadicInterval::new(self.k - 1, self.pos >> 1))
    }

    pub fn children(&self) -> [DyadicInterval; 2] {
        [
            DyadicInterval::new(self.k + 1, 2 * self.pos),
            DyadicInterval::new(self.k + 1, 2 * self.pos + 1),
        ]
    }

    /// The unique dyadic ancestor at scale `k ≤ self.k`.
    pub fn ancestor(&self, k: u32) -> DyadicInterval {
        debug_assert!(k <= self.k);
        DyadicInterval::new(k, shr(self.pos, self.k - k))
    }

    /// Grid cells of a `2^levels` grid covered by the interval.
    pub fn cells(&self, levels: u32) -> std::ops::Range<usize> {
        debug_assert!(self.k <= levels);
        let w = 1usize << (levels - self.k);
        let start = self.pos as usize * w;
        start..start + w
    }

    pub fn contains_cell(&self, levels: u32, cell: usize) -> bool {
        self.contains(&DyadicInterval::cell(levels, cell))
    }

    /// All dyadic intervals of `[0,1)` with scale `0..=max_k`, coarse first.
    pub fn all(max_k: u32) -> impl Iterator<Item = DyadicInterval> {
        (0..=max_k).flat_map(|k| (0..1u64 << k).map(move |pos| DyadicInterval::new(k, pos)))
    }
}

fn shr(v: u64, s: u32) -> u64 {
    if s >= 64 {
        0
    } else {
        v >> s
    }
}

/// A dyadic frequency interval `[index·2^len_exp, (index+1)·2^len_exp)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FreqInterval {
    pub len_exp: u32,
    pub index: u64,
}

impl FreqInterval {
    pub fn contains(&self, other: &FreqInterval) -> bool {
        other.len_exp <= self.len_exp && shr(other.index, self.len_exp - other.len_exp) == self.index
    }

    pub fn contains_point(&self, n: u64) -> bool {
        shr(n, self.len_exp) == self.index
    }

    pub fn start(&self) -> u128 {
        (self.index as u128) << self.len_exp
    }

    pub fn end(&self) -> u128 {
        ((self.index as u128) + 1) << self.len_exp
    }

    /// Twice the midpoint; integer-valued for every dyadic interval.
    pub fn double_center(&self) -> u128 {
        self.start() + self.end()
    }
}

/// `I × |I|^-1 [n, n+1)`: a dyadic rectangle of area one.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Tile {
    pub time: DyadicInterval,
    pub n: u64,
}

impl fmt::Debug for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tile({}, {}, n={})", self.time.k, self.time.pos, self.n)
    }
}

impl Tile {
    pub const fn new(time: DyadicInterval, n: u64) -> Self {
        Tile { time, n }
    }

    pub fn freq(&self) -> FreqInterval {
        FreqInterval {
            len_exp: self.time.k,
            index: self.n,
        }
    }

    /// Whether the Walsh packet of this tile is constant on cells of a
    /// `2^levels` grid.
    pub fn fits_grid(&self, levels: u32) -> bool {
        self.time.k <= levels && self.time.in_unit() && (self.n >> (levels - self.time.k)) == 0
    }
}

/// `P ≤ P'`: `I_P ⊆ I_P'` and `ω_P ⊇ ω_P'`.
pub fn tile_le(p: &Tile, p2: &Tile) -> bool {
    p2.time.contains(&p.time) && p.freq().contains(&p2.freq())
}

/// `I × |I|^-1 [2m, 2m+2)`: a dyadic rectangle of area two, the union of its
/// down-tile (frequency `2m`) and up-tile (frequency `2m+1`).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bitile {
    pub time: DyadicInterval,
    pub m: u64,
}

impl fmt::Debug for Bitile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B({}, {}, {})", self.time.k, self.time.pos, self.m)
    }
}

impl Bitile {
    pub const fn new(k: u32, pos: u64, m: u64) -> Self {
        Bitile {
            time: DyadicInterval { k, pos },
            m,
        }
    }

    pub fn k(&self) -> u32 {
        self.time.k
    }

    pub fn down(&self) -> Tile {
        Tile::new(self.time, 2 * self.m)
    }

    pub fn up(&self) -> Tile {
        Tile::new(self.time, 2 * self.m + 1)
    }

    pub fn freq(&self) -> FreqInterval {
        FreqInterval {
            len_exp: self.time.k + 1,
            index: self.m,
        }
    }

    /// Twice the center of `ω_P` (the left endpoint of `ω_{P_u}`, times two).
    pub fn double_center(&self) -> u128 {
        self.freq().double_center()
    }

    /// Every bitile `T` with `I_T ⊆ [0,1)` and `self ≤_u T`, coarse scales first.
    pub fn up_tops(&self) -> impl Iterator<Item = Bitile> + '_ {
        let k = self.time.k;
        let nu = 2 * self.m + 1;
        (0..=k).rev().flat_map(move |kt| {
            let d = k - kt;
            let time = self.time.ancestor(kt);
            let (lo, hi) = (nu << d, (nu + 1) << d);
            // odd n_T in [lo, hi)
            (lo..hi)
                .filter(|n| n & 1 == 1)
                .map(move |n| Bitile { time, m: (n - 1) / 2 })
        })
    }

    /// Every bitile `P'` with `I_P' ⊆ [0,1)` and `self ≤ P'`.
    pub fn ancestors(&self) -> impl Iterator<Item = Bitile> + '_ {
        let k = self.time.k;
        (0..=k).rev().flat_map(move |kt| {
            let d = k - kt;
            let time = self.time.ancestor(kt);
            (self.m << d..(self.m + 1) << d).map(move |m| Bitile { time, m })
        })
    }
}

/// `P ≤ P'` for bitiles.
pub fn bitile_le(p: &Bitile, p2: &Bitile) -> bool {
    p2.time.contains(&p.time) && p.freq().contains(&p2.freq())
}

/// `P ≤_d P'`: the down-tiles are ordered.
pub fn bitile_le_d(p: &Bitile, p2: &Bitile) -> bool {
    tile_le(&p.down(), &p2.down())
}

/// `P ≤_u P'`: the up-tiles are ordered.
pub fn bitile_le_u(p: &Bitile, p2: &Bitile) -> bool {
    tile_le(&p.up(), &p2.up())
}

/// Whether two tiles overlap as rectangles of the phase plane.
pub fn tiles_intersect(a: &Tile, b: &Tile) -> bool {
    tile_le(a, b) || tile_le(b, a)
}

#[derive(Serialize, Deserialize)]
struct BitileRepr {
    k: u32,
    pos: u64,
    m: u64,
}

impl Serialize for Bitile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BitileRepr {
            k: self.time.k,
            pos: self.time.pos,
            m: self.m,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bitile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BitileRepr::deserialize(d)?;
        Ok(Bitile::new(r.k, r.pos, r.m))
    }
}

/// The finite set of bitiles that can contribute to the bitile form of a
/// partial sum of a signal on a `2^levels` grid, in canonical `(k, pos, m)`
/// order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitileUniverse {
    levels: u32,
    items: Vec<Bitile>,
}

impl BitileUniverse {
    pub fn new(levels: u32) -> Result<Self> {
        if !(1..=MAX_LEVELS).contains(&levels) {
            return Err(Error::LevelsOutOfRange(levels, MAX_LEVELS));
        }
        let mut items = Vec::with_capacity(Self::expected_len(levels));
        for k in 0..=levels {
            let ms = Self::freq_count(levels, k);
            for pos in 0..1u64 << k {
                for m in 0..ms {
                    items.push(Bitile::new(k, pos, m));
                }
            }
        }
        Ok(BitileUniverse { levels, items })
    }

    fn freq_count(levels: u32, k: u32) -> u64 {
        if k < levels {
            1 << (levels - k - 1)
        } else {
            1
        }
    }

    /// `L·2^(L-1) + 2^L`.
    pub fn expected_len(levels: u32) -> usize {
        (levels as usize) * (1usize << (levels - 1)) + (1usize << levels)
    }

    /// Membership rule: `I_P ⊆ [0,1)`, `|I_P| ≥ 2^-L`, and the down-tile
    /// frequency meets `[0, 2^L)` (equivalently `ω_{P_u}` meets `[0, 2^L]`).
    pub fn admits(levels: u32, b: &Bitile) -> bool {
        b.time.k <= levels && b.time.in_unit() && b.m < Self::freq_count(levels, b.time.k)
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn items(&self) -> &[Bitile] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, b: &Bitile) -> bool {
        Self::admits(self.levels, b)
    }

    /// Position of `b` in the canonical order.
    pub fn index_of(&self, b: &Bitile) -> Option<usize> {
        if !self.contains(b) {
            return None;
        }
        let l = self.levels;
        let k = b.time.k;
        let half = 1usize << (l - 1);
        let idx = if k < l {
            k as usize * half + b.time.pos as usize * (1usize << (l - k - 1)) + b.m as usize
        } else {
            l as usize * half + b.time.pos as usize
        };
        Some(idx)
    }
}
