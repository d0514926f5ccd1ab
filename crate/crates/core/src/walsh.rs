//! Rademacher, Walsh and Haar functions, wave packets, and the fast
//! Walsh–Hadamard transform in Walsh–Paley order.
//!
//! Cell `j` of a `2^L` grid has binary address `x = 0.x_1 x_2 … x_L` with
//! `x_{i+1}` equal to bit `L-1-i` of `j`, and `r_i` is `+1` exactly when
//! that digit is zero. Consequently `w_n(cell j) = (-1)^{popcount(n & rev_L(j))}`.

use crate::dyadic::{DyadicInterval, Tile};
use crate::error::{Error, Result};
use crate::exec;
use crate::number::Scalar;
use crate::signal::Signal;

/// Reverses the lowest `bits` bits of `j`.
pub fn bit_reverse(j: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        j.reverse_bits() >> (usize::BITS - bits)
    }
}

/// Value of `r_i` on cell `cell` of a `2^levels` grid.
pub fn rademacher(i: u32, cell: usize, levels: u32) -> Result<i8> {
    if i >= levels {
        return Err(Error::RademacherIndex { index: i, levels });
    }
    Ok(if (cell >> (levels - 1 - i)) & 1 == 0 { 1 } else { -1 })
}

/// Samples of `w_n` on the `2^levels` grid.
pub fn walsh(n: u64, levels: u32) -> Result<Vec<i8>> {
    if levels < 64 && n >> levels != 0 {
        return Err(Error::WalshIndex { index: n, levels });
    }
    Ok((0..1usize << levels).map(|j| walsh_at(n, j, levels)).collect())
}

/// `w_n` on cell `j` of a `2^levels` grid (requires `n < 2^levels`).
pub fn walsh_at(n: u64, j: usize, levels: u32) -> i8 {
    if (n & bit_reverse(j, levels) as u64).count_ones() % 2 == 0 {
        1
    } else {
        -1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PacketNorm {
    /// `w_P = |I|^{-1/2} w_P^∞`.
    L2,
    /// `w_P^∞ = 1_I · w_n(·/|I|)`.
    Linf,
}

/// A wave packet sampled on the grid: a `±1` pattern on `I_P`, zero outside,
/// times `2^{half_exp/2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WavePacket {
    pub tile: Tile,
    pub levels: u32,
    pub pattern: Vec<i8>,
    pub norm: PacketNorm,
}

impl WavePacket {
    /// The packet equals `2^{half_exp/2}` times its sign pattern.
    pub fn half_exp(&self) -> i32 {
        match self.norm {
            PacketNorm::L2 => self.tile.time.k as i32,
            PacketNorm::Linf => 0,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let s = 2f64.powf(self.half_exp() as f64 / 2.0);
        self.pattern.iter().map(|&v| v as f64 * s).collect()
    }
}

/// The sign pattern of `w_P^∞` on the grid.
pub fn packet_pattern(tile: &Tile, levels: u32) -> Result<Vec<i8>> {
    if !tile.fits_grid(levels) {
        return Err(Error::TileOutOfGrid { tile: *tile, levels });
    }
    let mut out = vec![0i8; 1 << levels];
    let local = levels - tile.time.k;
    for (t, j) in tile.time.cells(levels).enumerate() {
        out[j] = walsh_at(tile.n, t, local);
    }
    Ok(out)
}

pub fn wave_packet(tile: &Tile, levels: u32, norm: PacketNorm) -> Result<WavePacket> {
    Ok(WavePacket {
        tile: *tile,
        levels,
        pattern: packet_pattern(tile, levels)?,
        norm,
    })
}

/// Sign pattern of `h_I^∞ = 1_I r_0(·/|I|)`; `h_I = |I|^{-1/2} h_I^∞`.
/// Needs `|I| > 2^-levels`.
pub fn haar_pattern(interval: &DyadicInterval, levels: u32) -> Result<Vec<i8>> {
    if interval.k >= levels || !interval.in_unit() {
        return Err(Error::IntervalOutOfGrid {
            interval: *interval,
            levels,
        });
    }
    let mut out = vec![0i8; 1 << levels];
    let cells = interval.cells(levels);
    let mid = cells.start + cells.len() / 2;
    for j in cells {
        out[j] = if j < mid { 1 } else { -1 };
    }
    Ok(out)
}

/// In-place unnormalised Walsh–Paley transform of `rows` rows of `width`
/// scalars: `out[n] = Σ_j in[j] · w_n(j)`.
pub fn fwht_in_place<T: Scalar>(data: &mut [T], width: usize) -> Result<()> {
    let rows = data.len() / width.max(1);
    if width == 0 || rows * width != data.len() || !rows.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(rows));
    }
    let bits = rows.trailing_zeros();
    for j in 0..rows {
        let r = bit_reverse(j, bits);
        if j < r {
            for c in 0..width {
                data.swap(j * width + c, r * width + c);
            }
        }
    }
    let mut h = 1;
    while h < rows {
        let span = 2 * h * width;
        let stage = |_: usize, block: &mut [T]| {
            let (lo, hi) = block.split_at_mut(h * width);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let s = a.clone() + b.clone();
                let d = a.clone() - b.clone();
                *a = s;
                *b = d;
            }
        };
        if rows >= PARALLEL_MIN_ROWS {
            exec::for_each_chunk(data, span, stage);
        } else {
            data.chunks_mut(span).enumerate().for_each(|(i, c)| stage(i, c));
        }
        h *= 2;
    }
    Ok(())
}

const PARALLEL_MIN_ROWS: usize = 1 << 12;

/// Walsh coefficients `⟨f, w_n⟩ = 2^-L Σ_j f_j w_n(j)` for `n < 2^L`,
/// returned in the shape of `f` (row `n` holds coefficient `n`).
pub fn fwht<T: Scalar>(f: &Signal<T>) -> Signal<T> {
    let mut data = f.data().to_vec();
    fwht_in_place(&mut data, f.width()).expect("signal length is a power of two");
    let shift = -(f.levels() as i32);
    let data = data.into_iter().map(|x| x.mul_pow2(shift)).collect();
    Signal::new(f.levels(), f.dim(), f.kind(), data).expect("shape preserved")
}

/// Inverse of [`fwht`]: `f_j = Σ_n c_n w_n(j)`.
pub fn inverse_fwht<T: Scalar>(c: &Signal<T>) -> Signal<T> {
    let mut data = c.data().to_vec();
    fwht_in_place(&mut data, c.width()).expect("signal length is a power of two");
    Signal::new(c.levels(), c.dim(), c.kind(), data).expect("shape preserved")
}

/// `⟨f, w_P⟩ = 2^{half_exp/2} · value`.
#[derive(Clone, Debug, PartialEq)]
pub struct PacketPairing<T> {
    pub value: Vec<T>,
    pub half_exp: i32,
}

impl<T: Scalar> PacketPairing<T> {
    pub fn to_f64(&self) -> Vec<f64> {
        let s = 2f64.powf(self.half_exp as f64 / 2.0);
        self.value.iter().map(|v| v.to_f64() * s).collect()
    }
}

/// Exact integral of `f` against the packet of `tile`, by direct summation.
pub fn pairing<T: Scalar>(f: &Signal<T>, tile: &Tile, norm: PacketNorm) -> Result<PacketPairing<T>> {
    let pattern = packet_pattern(tile, f.levels())?;
    let value = pattern_pairing(f, &pattern, tile.time.cells(f.levels()));
    let half_exp = match norm {
        PacketNorm::L2 => tile.time.k as i32,
        PacketNorm::Linf => 0,
    };
    Ok(PacketPairing { value, half_exp })
}

/// `2^-L Σ_{j ∈ cells} pattern_j f_j`.
pub(crate) fn pattern_pairing<T: Scalar>(
    f: &Signal<T>,
    pattern: &[i8],
    cells: std::ops::Range<usize>,
) -> Vec<T> {
    let mut acc = vec![T::zero(); f.width()];
    for j in cells {
        match pattern[j] {
            1 => acc.iter_mut().zip(f.cell(j)).for_each(|(a, x)| *a += x.clone()),
            -1 => acc.iter_mut().zip(f.cell(j)).for_each(|(a, x)| *a -= x.clone()),
            _ => {}
        }
    }
    let shift = -(f.levels() as i32);
    acc.into_iter().map(|a| a.mul_pow2(shift)).collect()
}

/// All `L^∞`-normalised packet coefficients `⟨f, w_P^∞⟩` of a signal, for
/// every tile resolved by the grid: scale `k`, position `pos < 2^k`,
/// frequency `n < 2^(L-k)`.
///
/// Built from one local Walsh–Paley transform per dyadic block, so the whole
/// table costs `O(L² 2^L)` scalar operations.
#[derive(Clone, Debug)]
pub struct PacketTable<T> {
    levels: u32,
    width: usize,
    scales: Vec<Vec<T>>,
}

impl<T: Scalar> PacketTable<T> {
    pub fn new(f: &Signal<T>) -> Self {
        let levels = f.levels();
        let width = f.width();
        let shift = -(levels as i32);
        let scales = (0..=levels)
            .map(|k| {
                let block = (1usize << (levels - k)) * width;
                let mut data = f.data().to_vec();
                exec::for_each_chunk(&mut data, block, |_, chunk| {
                    fwht_in_place(chunk, width).expect("block length is a power of two");
                    for x in chunk.iter_mut() {
                        *x = x.mul_pow2(shift);
                    }
                });
                data
            })
            .collect();
        PacketTable { levels, width, scales }
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `⟨f, w_P^∞⟩`, or `None` when the tile oscillates below the grid
    /// resolution (its pairing with any grid signal is zero).
    pub fn coefficient(&self, tile: &Tile) -> Option<&[T]> {
        if !tile.fits_grid(self.levels) {
            return None;
        }
        let k = tile.time.k;
        let row = ((tile.time.pos as usize) << (self.levels - k)) + tile.n as usize;
        Some(&self.scales[k as usize][row * self.width..(row + 1) * self.width])
    }

    /// Like [`coefficient`](Self::coefficient), with zero for unresolved tiles.
    pub fn coefficient_or_zero(&self, tile: &Tile) -> Vec<T> {
        self.coefficient(tile)
            .map(|c| c.to_vec())
            .unwrap_or_else(|| vec![T::zero(); self.width])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicInterval, Tile};
    use crate::number::Dyadic;
    use crate::signal::ValueKind;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn iv(k: u32, pos: u64) -> DyadicInterval {
        DyadicInterval::new(k, pos)
    }

    #[test]
    fn rademacher_examples() {
        assert_eq!(rademacher(0, 0, 1).unwrap(), 1);
        assert_eq!(rademacher(0, 1, 1).unwrap(), -1);
        assert_eq!(rademacher(1, 1, 2).unwrap(), -1);
        for l in 1..6 {
            assert_eq!(rademacher(0, 0, l).unwrap(), 1);
        }
        assert!(rademacher(2, 0, 2).is_err());
    }

    /// `r_i(x) = sign sin(2π 2^i x)` sampled at cell midpoints.
    #[test]
    fn rademacher_matches_sine_definition() {
        let l = 6;
        for i in 0..l {
            for j in 0..1usize << l {
                let x = (j as f64 + 0.5) / (1u64 << l) as f64;
                let s = (2.0 * std::f64::consts::PI * 2f64.powi(i as i32) * x).sin().signum() as i8;
                assert_eq!(rademacher(i, j, l).unwrap(), s);
            }
        }
    }

    #[test]
    fn walsh_examples() {
        assert!(walsh(0, 3).unwrap().iter().all(|&v| v == 1));
        assert_eq!(walsh(1, 1).unwrap(), vec![1, -1]);
        assert_eq!(walsh(3, 2).unwrap(), vec![1, -1, -1, 1]);
        assert!(walsh(4, 2).is_err());
    }

    #[test]
    fn walsh_is_rademacher_product() {
        let l = 5;
        for n in 0..1u64 << l {
            let w = walsh(n, l).unwrap();
            for (j, &v) in w.iter().enumerate() {
                let mut p = 1i8;
                for i in 0..l {
                    if n >> i & 1 == 1 {
                        p *= rademacher(i, j, l).unwrap();
                    }
                }
                assert_eq!(v, p);
            }
        }
    }

    #[test]
    fn packet_examples() {
        let p = wave_packet(&Tile::new(iv(0, 0), 0), 3, PacketNorm::Linf).unwrap();
        assert!(p.pattern.iter().all(|&v| v == 1));
        let p = wave_packet(&Tile::new(iv(1, 0), 1), 2, PacketNorm::L2).unwrap();
        assert_eq!(p.pattern, vec![1, -1, 0, 0]);
        assert_eq!(p.half_exp(), 1);
        let h = haar_pattern(&iv(1, 1), 2).unwrap();
        assert_eq!(h, vec![0, 0, 1, -1]);
        assert!(wave_packet(&Tile::new(iv(1, 0), 2), 2, PacketNorm::L2).is_err());
        assert!(haar_pattern(&iv(2, 0), 2).is_err());
    }

    #[test]
    fn haar_is_frequency_one_packet() {
        for l in 1..=6 {
            for i in DyadicInterval::all(l - 1) {
                let w = packet_pattern(&Tile::new(i, 1), l).unwrap();
                assert_eq!(w, haar_pattern(&i, l).unwrap());
            }
        }
    }

    #[test]
    fn fwht_examples() {
        let c = Signal::constant(3, 1, ValueKind::Vector, &[d("5/4")]).unwrap();
        let t = fwht(&c);
        assert_eq!(t.data()[0], d("5/4"));
        assert!(t.data()[1..].iter().all(|x| x.is_zero()));
        let f = Signal::scalar(1, vec![d("3"), d("1/2")]).unwrap();
        assert_eq!(fwht(&f).data(), &[d("7/4"), d("5/4")]);
        let mut bad = vec![d("1"); 3];
        assert!(fwht_in_place(&mut bad, 1).is_err());
    }

    #[test]
    fn orthonormality_exact() {
        for l in 1..=6u32 {
            let n = 1u64 << l;
            let ws: Vec<Vec<i8>> = (0..n).map(|i| walsh(i, l).unwrap()).collect();
            for a in 0..n as usize {
                for b in 0..n as usize {
                    let dotp: i64 = ws[a].iter().zip(&ws[b]).map(|(x, y)| (*x as i64) * (*y as i64)).sum();
                    let g = Dyadic::from_int(dotp).mul_pow2(-(l as i32));
                    assert_eq!(g, Dyadic::from_int((a == b) as i64));
                }
            }
        }
    }

    #[test]
    fn pairing_examples() {
        let c = Signal::constant(3, 2, ValueKind::Vector, &[d("1"), d("-2")]).unwrap();
        let p = pairing(&c, &Tile::new(iv(0, 0), 1), PacketNorm::L2).unwrap();
        assert!(p.value.iter().all(|x| x.is_zero()));

        // f = w_P for P = ([0,1/4), 1) at L = 3: |I|^{-1/2} = 2
        let tile = Tile::new(iv(2, 0), 1);
        let pat = packet_pattern(&tile, 3).unwrap();
        let f = Signal::scalar(3, pat.iter().map(|&s| Dyadic::from_int(2 * s as i64)).collect()).unwrap();
        let p = pairing(&f, &tile, PacketNorm::L2).unwrap();
        // 2^{2/2} · 1/2 = 1
        assert_eq!((p.half_exp, p.value[0].clone()), (2, d("1/2")));

        let f = Signal::scalar(2, vec![d("1"), d("2"), d("3"), d("4")]).unwrap();
        let p = pairing(&f, &Tile::new(iv(1, 0), 1), PacketNorm::Linf).unwrap();
        assert_eq!(p.value[0], d("-1/4"));
    }

    /// `|I|^{-1} ⟨f, w_P^∞⟩ w_P^∞ = ⟨f, w_P⟩ w_P` sample by sample.
    #[test]
    fn linf_pairing_reproduces_l2_projection() {
        let f = Signal::scalar(3, (0..8).map(|j| Dyadic::from_small(j * j - 5, -3)).collect()).unwrap();
        for k in 0..=3u32 {
            for pos in 0..1u64 << k {
                for n in 0..1u64 << (3 - k) {
                    let tile = Tile::new(iv(k, pos), n);
                    let inf = pairing(&f, &tile, PacketNorm::Linf).unwrap();
                    let l2 = pairing(&f, &tile, PacketNorm::L2).unwrap();
                    let pk = wave_packet(&tile, 3, PacketNorm::L2).unwrap();
                    let pat = packet_pattern(&tile, 3).unwrap();
                    for j in 0..8 {
                        let exact = inf.value[0].mul_pow2(k as i32).to_f64() * pat[j] as f64;
                        let float = l2.to_f64()[0] * pk.to_f64()[j];
                        assert!((exact - float).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn packet_table_matches_direct_pairing() {
        let f = Signal::new(
            4,
            2,
            ValueKind::Vector,
            (0..32).map(|j| Dyadic::from_small((j * 37 % 23) as i128 - 11, -4)).collect(),
        )
        .unwrap();
        let table = PacketTable::new(&f);
        for k in 0..=4u32 {
            for pos in 0..1u64 << k {
                for n in 0..1u64 << (4 - k) {
                    let tile = Tile::new(iv(k, pos), n);
                    let direct = pairing(&f, &tile, PacketNorm::Linf).unwrap();
                    assert_eq!(table.coefficient(&tile).unwrap(), direct.value.as_slice());
                }
                assert!(table.coefficient(&Tile::new(iv(k, pos), 1 << (4 - k))).is_none());
            }
        }
    }

    fn arb_signal(max_l: u32) -> impl Strategy<Value = Signal<Dyadic>> {
        (1..=max_l).prop_flat_map(|l| {
            proptest::collection::vec(-(1i64 << 16)..=(1i64 << 16), 1usize << l).prop_map(move |v| {
                Signal::scalar(l, v.into_iter().map(|x| Dyadic::from_small(x as i128, -16)).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn fwht_matches_naive(f in arb_signal(8)) {
            let l = f.levels();
            let fast = fwht(&f);
            for n in 0..1u64 << l {
                let w = walsh(n, l).unwrap();
                let naive: Dyadic = f.data().iter().zip(&w)
                    .map(|(x, &s)| if s == 1 { x.clone() } else { -x.clone() })
                    .sum::<Dyadic>()
                    .mul_pow2(-(l as i32));
                prop_assert_eq!(&fast.data()[n as usize], &naive);
            }
        }

        #[test]
        fn fwht_round_trip(f in arb_signal(9)) {
            prop_assert_eq!(inverse_fwht(&fwht(&f)), f);
        }
    }
}
