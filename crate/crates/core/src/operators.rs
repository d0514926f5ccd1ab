//! Partial sums, the linearised Carleson operator in its direct and bitile
//! forms, the maximal partial-sum operator, and Haar martingale transforms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::certificate::{Backing, Certificate};
use crate::dyadic::{Bitile, BitileUniverse, DyadicInterval};
use crate::error::{Error, Result};
use crate::exec;
use crate::number::{Num, Scalar};
use crate::signal::{lq_norm, maximal_function, FrequencyChoice, NormPlugin, Signal};
use crate::walsh::{fwht, fwht_in_place, inverse_fwht, walsh_at, PacketTable};

/// A `±1` sign for every index of some family (dyadic intervals or bitiles).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SignChoice<K> {
    Constant(i8),
    Map(BTreeMap<K, i8>),
}

impl<K: Ord> SignChoice<K> {
    pub fn get(&self, key: &K) -> Option<i8> {
        match self {
            SignChoice::Constant(s) => Some(*s),
            SignChoice::Map(m) => m.get(key).copied(),
        }
    }
}

fn check_match<T: Scalar>(f: &Signal<T>, nfun: &FrequencyChoice) -> Result<()> {
    if f.levels() != nfun.levels() {
        return Err(Error::ResolutionMismatch {
            what: "frequency choice",
            expected: f.levels(),
            found: nfun.levels(),
        });
    }
    Ok(())
}

/// `S_N f = Σ_{n<N} ⟨f, w_n⟩ w_n`.
pub fn partial_sum<T: Scalar>(f: &Signal<T>, n: u64) -> Result<Signal<T>> {
    let l = f.levels();
    if n > 1u64 << l {
        return Err(Error::CutoffOutOfRange { n, levels: l });
    }
    let mut c = fwht(f);
    let w = f.width();
    for row in n as usize..f.n_cells() {
        for x in c.cell_mut(row) {
            *x = T::zero();
        }
    }
    debug_assert_eq!(c.width(), w);
    Ok(inverse_fwht(&c))
}

/// Every partial sum `S_N f(x)` in `O(L)` operations per query after
/// `O(L² 2^L)` preprocessing.
///
/// The cutoffs `n < N` split into blocks `[a_b, a_b + 2^b)` for each set bit
/// `b` of `N`, with `a_b` the bits of `N` above `b`. On such a block
/// `w_{a_b + t} = w_{a_b} w_t`, and `Σ_t c_{a_b+t} w_t` only depends on the
/// first `b` binary digits of `x`, so one local inverse transform per block
/// and scale serves every query.
#[derive(Clone, Debug)]
pub struct PartialSums<T> {
    levels: u32,
    width: usize,
    blocks: Vec<Vec<T>>,
}

impl<T: Scalar> PartialSums<T> {
    pub fn new(f: &Signal<T>) -> Self {
        let coeffs = fwht(f);
        let width = f.width();
        let levels = f.levels();
        let blocks = (0..=levels)
            .map(|b| {
                let mut data = coeffs.data().to_vec();
                exec::for_each_chunk(&mut data, width << b, |_, chunk| {
                    fwht_in_place(chunk, width).expect("block length is a power of two");
                });
                data
            })
            .collect();
        PartialSums { levels, width, blocks }
    }

    /// `S_N f` on cell `j`.
    pub fn value(&self, n: u64, j: usize) -> Vec<T> {
        let l = self.levels;
        let mut acc = vec![T::zero(); self.width];
        for b in 0..=l {
            if (n >> b) & 1 == 0 {
                continue;
            }
            let a = ((n >> (b + 1)) << (b + 1)) as usize;
            let row = a + (j >> (l - b));
            let vals = &self.blocks[b as usize][row * self.width..(row + 1) * self.width];
            if walsh_at(a as u64, j, l) == 1 {
                acc.iter_mut().zip(vals).for_each(|(s, v)| *s += v.clone());
            } else {
                acc.iter_mut().zip(vals).for_each(|(s, v)| *s -= v.clone());
            }
        }
        acc
    }
}

/// `x ↦ S_{N(x)} f(x)`.
pub fn carleson_direct<T: Scalar>(f: &Signal<T>, nfun: &FrequencyChoice) -> Result<Signal<T>> {
    check_match(f, nfun)?;
    let sums = PartialSums::new(f);
    let cells = exec::map_range(f.n_cells(), |j| sums.value(nfun.at(j), j));
    Signal::new(f.levels(), f.dim(), f.kind(), cells.concat())
}

/// `Σ_P ⟨f, w_{P_d}⟩ w_{P_d}(x) 1_{ω_{P_u}}(N(x))` over the bitile universe.
pub fn carleson_bitile<T: Scalar>(
    f: &Signal<T>,
    nfun: &FrequencyChoice,
    universe: &BitileUniverse,
) -> Result<Signal<T>> {
    if universe.levels() != f.levels() {
        return Err(Error::ResolutionMismatch {
            what: "bitile universe",
            expected: f.levels(),
            found: universe.levels(),
        });
    }
    bitile_sum(f, nfun, universe.items())
}

/// The bitile sum over an arbitrary finite set of bitiles with
/// `|I_P| ≥ 2^-L`. Every term is evaluated, including its indicator.
pub fn bitile_sum<T: Scalar>(f: &Signal<T>, nfun: &FrequencyChoice, bitiles: &[Bitile]) -> Result<Signal<T>> {
    check_match(f, nfun)?;
    let l = f.levels();
    let mut by_time: HashMap<DyadicInterval, BTreeSet<u64>> = HashMap::new();
    for b in bitiles {
        if b.k() > l || !b.time.in_unit() {
            return Err(Error::TileOutOfGrid {
                tile: b.down(),
                levels: l,
            });
        }
        by_time.entry(b.time).or_default().insert(b.m);
    }
    let table = PacketTable::new(f);
    let w = f.width();
    let cells = exec::map_range(f.n_cells(), |j| {
        let n = nfun.at(j);
        let mut acc = vec![T::zero(); w];
        for k in 0..=l {
            let time = DyadicInterval::cell(l, j).ancestor(k);
            let Some(ms) = by_time.get(&time) else { continue };
            for &m in ms {
                let p = Bitile { time, m };
                if !p.up().freq().contains_point(n) {
                    continue;
                }
                let down = p.down();
                let Some(c) = table.coefficient(&down) else { continue };
                let local = j - time.cells(l).start;
                let sign = walsh_at(down.n, local, l - k);
                for (a, v) in acc.iter_mut().zip(c) {
                    let t = v.mul_pow2(k as i32);
                    if sign == 1 {
                        *a += t;
                    } else {
                        *a -= t;
                    }
                }
            }
        }
        acc
    });
    Signal::new(l, f.dim(), f.kind(), cells.concat())
}

/// `S*f(x) = max_{0 ≤ N ≤ 2^L} ‖S_N f(x)‖`, by a running sum per cell.
pub fn maximal_partial_sum<T: Scalar>(f: &Signal<T>, plugin: &NormPlugin) -> Signal<f64> {
    let c = fwht(f);
    let l = f.levels();
    let (kind, dim, w) = (f.kind(), f.dim(), f.width());
    let vals = exec::map_range(f.n_cells(), |j| {
        let mut acc = vec![T::zero(); w];
        let mut best = 0.0f64;
        for n in 0..f.n_cells() {
            let sign = walsh_at(n as u64, j, l);
            for (a, v) in acc.iter_mut().zip(c.cell(n)) {
                if sign == 1 {
                    *a += v.clone();
                } else {
                    *a -= v.clone();
                }
            }
            best = best.max(plugin.value_norm(&acc, kind, dim));
        }
        best
    });
    Signal::scalar(l, vals).expect("one value per cell")
}

/// Sums of `f` over every dyadic block: `sums[k]` holds `2^k` rows.
fn block_sums<T: Scalar>(f: &Signal<T>) -> Vec<Vec<T>> {
    let l = f.levels() as usize;
    let w = f.width();
    let mut sums = vec![Vec::new(); l + 1];
    sums[l] = f.data().to_vec();
    for k in (0..l).rev() {
        let finer = &sums[k + 1];
        let cur: Vec<T> = (0..(1usize << k) * w)
            .map(|i| {
                let (row, c) = (i / w, i % w);
                finer[2 * row * w + c].clone() + finer[(2 * row + 1) * w + c].clone()
            })
            .collect();
        sums[k] = cur;
    }
    sums
}

/// `⟨f, h_I^∞⟩` for every `I` with `|I| > 2^-L`, from block sums.
fn haar_coefficient<T: Scalar>(sums: &[Vec<T>], levels: u32, w: usize, i: &DyadicInterval) -> Vec<T> {
    let child = &sums[i.k as usize + 1];
    let (a, b) = (2 * i.pos as usize, 2 * i.pos as usize + 1);
    (0..w)
        .map(|c| (child[a * w + c].clone() - child[b * w + c].clone()).mul_pow2(-(levels as i32)))
        .collect()
}

/// `Σ_I ε_I ⟨f, h_I⟩ h_I` over `family`, or over every `I ⊆ [0,1)` with
/// `|I| > 2^-L` when `family` is `None`.
pub fn martingale_transform<T: Scalar>(
    f: &Signal<T>,
    signs: &SignChoice<DyadicInterval>,
    family: Option<&[DyadicInterval]>,
) -> Result<Signal<T>> {
    let l = f.levels();
    let w = f.width();
    let intervals: BTreeSet<DyadicInterval> = match family {
        Some(fam) => {
            for i in fam {
                if i.k >= l || !i.in_unit() {
                    return Err(Error::IntervalOutOfGrid { interval: *i, levels: l });
                }
            }
            fam.iter().copied().collect()
        }
        None => DyadicInterval::all(l.saturating_sub(1)).filter(|_| l > 0).collect(),
    };
    let mut sign_of = HashMap::with_capacity(intervals.len());
    for i in &intervals {
        let s = signs.get(i).ok_or(Error::MissingSign(*i))?;
        sign_of.insert(*i, s);
    }
    let sums = block_sums(f);
    let coeffs: HashMap<DyadicInterval, Vec<T>> =
        intervals.iter().map(|i| (*i, haar_coefficient(&sums, l, w, i))).collect();
    let cells = exec::map_range(f.n_cells(), |j| {
        let cell = DyadicInterval::cell(l, j);
        let mut acc = vec![T::zero(); w];
        for k in 0..l {
            let i = cell.ancestor(k);
            let Some(c) = coeffs.get(&i) else { continue };
            // h_I^∞ is +1 on the left child and -1 on the right one
            let left = cell.ancestor(k + 1).pos % 2 == 0;
            let positive = left == (sign_of[&i] == 1);
            for (a, v) in acc.iter_mut().zip(c) {
                let t = v.mul_pow2(k as i32);
                if positive {
                    *a += t;
                } else {
                    *a -= t;
                }
            }
        }
        acc
    });
    Signal::new(l, f.dim(), f.kind(), cells.concat())
}

/// Result of [`stopped_haar_sum`].
#[derive(Clone, Debug)]
pub struct StoppedHaarSum<T> {
    pub sum: Signal<T>,
    pub family: Vec<DyadicInterval>,
    pub norm: f64,
    pub bound: f64,
    pub certificate: Certificate,
}

/// `Σ_{I ∈ 𝓘, I ⊆ K} ⟨f, h_I⟩ h_I` with `𝓘 = {I : inf_I Mf ≤ λ}`, its `L^p`
/// norm, and the ratio against `λ |K|^{1/p}`.
pub fn stopped_haar_sum<T: Scalar>(
    f: &Signal<T>,
    lambda: f64,
    k: &DyadicInterval,
    plugin: &NormPlugin,
    p: f64,
) -> Result<StoppedHaarSum<T>> {
    if lambda.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Precondition(format!("λ = {lambda} must be positive")));
    }
    if !k.in_unit() || k.k > f.levels() {
        return Err(Error::IntervalOutOfGrid {
            interval: *k,
            levels: f.levels(),
        });
    }
    let l = f.levels();
    let mf = maximal_function(f, plugin);
    // minima of Mf over every dyadic block
    let mut mins = vec![Vec::new(); l as usize + 1];
    mins[l as usize] = mf.data().to_vec();
    for s in (0..l as usize).rev() {
        mins[s] = (0..1usize << s)
            .map(|r| mins[s + 1][2 * r].min(mins[s + 1][2 * r + 1]))
            .collect();
    }
    let family: Vec<DyadicInterval> = (k.k..l)
        .flat_map(|s| {
            let d = s - k.k;
            (k.pos << d..(k.pos + 1) << d).map(move |pos| DyadicInterval::new(s, pos))
        })
        .filter(|i| mins[i.k as usize][i.pos as usize] <= lambda)
        .collect();
    let sum = martingale_transform(f, &SignChoice::Constant(1), Some(&family))?;
    let norm = lq_norm(&sum, p, plugin);
    let bound = lambda * k.len().to_f64().powf(1.0 / p);
    let mut certificate = Certificate::new(
        "stopped-haar-sum",
        Num::Float(norm),
        Num::Float(bound),
        Backing::Empirical,
    );
    certificate.set("lambda", lambda);
    certificate.set("p", p);
    certificate.set("intervals", family.len());
    Ok(StoppedHaarSum {
        sum,
        family,
        norm,
        bound,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number::Dyadic;
    use crate::signal::ValueKind;
    use crate::walsh::walsh;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn scalar(vals: &[&str]) -> Signal<Dyadic> {
        let l = vals.len().trailing_zeros();
        Signal::scalar(l, vals.iter().map(|s| d(s)).collect()).unwrap()
    }

    /// Direct evaluation of `Σ_{n<N} ⟨f,w_n⟩ w_n(j)` from naive coefficients.
    fn naive_partial(f: &Signal<Dyadic>, n: u64, j: usize) -> Vec<Dyadic> {
        let l = f.levels();
        let mut acc = vec![Dyadic::zero(); f.width()];
        for t in 0..n {
            let w = walsh(t, l).unwrap();
            for c in 0..f.width() {
                let coef: Dyadic = (0..f.n_cells())
                    .map(|i| if w[i] == 1 { f.cell(i)[c].clone() } else { -f.cell(i)[c].clone() })
                    .sum::<Dyadic>()
                    .mul_pow2(-(l as i32));
                if w[j] == 1 {
                    acc[c] += coef;
                } else {
                    acc[c] -= coef;
                }
            }
        }
        acc
    }

    #[test]
    fn partial_sum_examples() {
        let f = scalar(&["3", "1/2", "-1", "5/4"]);
        assert_eq!(partial_sum(&f, 4).unwrap(), f);
        assert!(partial_sum(&f, 0).unwrap().data().iter().all(|x| x.is_zero()));
        let mean = d("15/16");
        assert!(partial_sum(&f, 1).unwrap().data().iter().all(|x| *x == mean));
        assert!(partial_sum(&f, 5).is_err());
    }

    #[test]
    fn carleson_examples() {
        let f = scalar(&["3", "5"]);
        let n = FrequencyChoice::new(1, vec![1, 2]).unwrap();
        assert_eq!(carleson_direct(&f, &n).unwrap().data(), &[d("4"), d("5")]);
        let u = BitileUniverse::new(1).unwrap();
        assert_eq!(carleson_bitile(&f, &n, &u).unwrap().data(), &[d("4"), d("5")]);

        let full = FrequencyChoice::constant(1, 2).unwrap();
        assert_eq!(carleson_direct(&f, &full).unwrap(), f);
        let zero = FrequencyChoice::constant(1, 0).unwrap();
        assert!(carleson_bitile(&f, &zero, &u).unwrap().data().iter().all(|x| x.is_zero()));
        let c = Signal::constant(3, 1, ValueKind::Vector, &[d("7/2")]).unwrap();
        let u3 = BitileUniverse::new(3).unwrap();
        let n3 = FrequencyChoice::new(3, vec![1, 8, 3, 5, 2, 7, 6, 4]).unwrap();
        assert_eq!(carleson_bitile(&c, &n3, &u3).unwrap(), c);
    }

    #[test]
    fn carleson_rejects_mismatch() {
        let f = scalar(&["3", "5"]);
        let n = FrequencyChoice::constant(2, 1).unwrap();
        assert!(carleson_direct(&f, &n).is_err());
        let u = BitileUniverse::new(2).unwrap();
        assert!(carleson_bitile(&f, &FrequencyChoice::constant(1, 1).unwrap(), &u).is_err());
    }

    #[test]
    fn partial_sums_table_matches_naive() {
        let f = Signal::new(
            3,
            2,
            ValueKind::Vector,
            (0..16).map(|i| Dyadic::from_small((i * 7 % 11) as i128 - 5, -2)).collect(),
        )
        .unwrap();
        let table = PartialSums::new(&f);
        for n in 0..=8 {
            for j in 0..8 {
                assert_eq!(table.value(n, j), naive_partial(&f, n, j), "N={n} j={j}");
            }
        }
    }

    #[test]
    fn maximal_partial_sum_examples() {
        let e = NormPlugin::euclidean();
        let f = scalar(&["1", "-1"]);
        assert_eq!(maximal_partial_sum(&f, &e).data(), &[1.0, 1.0]);
        let c = Signal::constant(2, 2, ValueKind::Vector, &[d("3"), d("4")]).unwrap();
        assert!(maximal_partial_sum(&c, &e).data().iter().all(|&x| x == 5.0));
    }

    #[test]
    fn martingale_examples() {
        let f = scalar(&["3", "1", "2", "-2"]);
        let all_plus = martingale_transform(&f, &SignChoice::Constant(1), None).unwrap();
        let mean = d("1");
        assert_eq!(all_plus.data(), f.map(|x| x.clone() - mean.clone()).data());
        let all_minus = martingale_transform(&f, &SignChoice::Constant(-1), None).unwrap();
        assert_eq!(all_minus.data(), f.map(|x| mean.clone() - x.clone()).data());

        let g = scalar(&["3", "1"]);
        let one = [DyadicInterval::UNIT];
        for eps in [1i8, -1] {
            let t = martingale_transform(&g, &SignChoice::Constant(eps), Some(&one)).unwrap();
            let e = Dyadic::from_int(eps as i64);
            assert_eq!(t.data(), &[e.clone(), -e]);
        }
        let missing = SignChoice::Map(BTreeMap::new());
        assert!(matches!(
            martingale_transform(&g, &missing, Some(&one)),
            Err(Error::MissingSign(_))
        ));
    }

    #[test]
    fn stopped_sum_examples() {
        let e = NormPlugin::euclidean();
        let f = scalar(&["1", "1", "0", "0"]);
        let k = DyadicInterval::UNIT;
        let low = stopped_haar_sum(&f, 0.25, &k, &e, 2.0).unwrap();
        assert!(low.family.is_empty() && low.norm == 0.0);
        let high = stopped_haar_sum(&f, 1.0, &k, &e, 2.0).unwrap();
        let full = martingale_transform(&f, &SignChoice::Constant(1), None).unwrap();
        assert_eq!(high.sum, full);
        let mid = stopped_haar_sum(&f, 0.75, &k, &e, 2.0).unwrap();
        // [0,1/2) and its children have inf Mf = 1
        assert_eq!(
            mid.family,
            vec![DyadicInterval::UNIT, DyadicInterval::new(1, 1)]
        );
        assert!(stopped_haar_sum(&f, 0.0, &k, &e, 2.0).is_err());
    }

    fn arb_exact(l: u32, w: usize) -> impl Strategy<Value = Vec<Dyadic>> {
        proptest::collection::vec(-512i64..=512, w << l)
            .prop_map(|v| v.into_iter().map(|x| Dyadic::from_small(x as i128, -6)).collect())
    }

    proptest! {
        #[test]
        fn bitile_form_matches_direct(
            (l, vals, ns) in (1u32..=6).prop_flat_map(|l| (
                Just(l),
                arb_exact(l, 2),
                proptest::collection::vec(0u64..=(1u64 << l), 1usize << l),
            ))
        ) {
            let f = Signal::new(l, 2, ValueKind::Vector, vals).unwrap();
            let n = FrequencyChoice::new(l, ns).unwrap();
            let u = BitileUniverse::new(l).unwrap();
            prop_assert_eq!(carleson_bitile(&f, &n, &u).unwrap(), carleson_direct(&f, &n).unwrap());
        }

        #[test]
        fn operators_are_linear(
            (l, a, b, ns) in (1u32..=5).prop_flat_map(|l| (
                Just(l), arb_exact(l, 1), arb_exact(l, 1),
                proptest::collection::vec(0u64..=(1u64 << l), 1usize << l),
            )),
            s in -8i64..=8,
        ) {
            let f = Signal::scalar(l, a).unwrap();
            let g = Signal::scalar(l, b).unwrap();
            let s = Dyadic::from_int(s);
            let comb = f.scale(&s).add(&g).unwrap();
            let n = FrequencyChoice::new(l, ns).unwrap();
            let lin = |x: Signal<Dyadic>, y: Signal<Dyadic>| x.scale(&s).add(&y).unwrap();
            prop_assert_eq!(
                carleson_direct(&comb, &n).unwrap(),
                lin(carleson_direct(&f, &n).unwrap(), carleson_direct(&g, &n).unwrap())
            );
            let u = BitileUniverse::new(l).unwrap();
            prop_assert_eq!(
                carleson_bitile(&comb, &n, &u).unwrap(),
                lin(carleson_bitile(&f, &n, &u).unwrap(), carleson_bitile(&g, &n, &u).unwrap())
            );
            let eps = SignChoice::Map(
                DyadicInterval::all(l - 1).map(|i| (i, if i.pos % 3 == 0 { 1 } else { -1 })).collect(),
            );
            prop_assert_eq!(
                martingale_transform(&comb, &eps, None).unwrap(),
                lin(martingale_transform(&f, &eps, None).unwrap(), martingale_transform(&g, &eps, None).unwrap())
            );
            let nn = n.at(0);
            prop_assert_eq!(
                partial_sum(&comb, nn).unwrap(),
                lin(partial_sum(&f, nn).unwrap(), partial_sum(&g, nn).unwrap())
            );
        }

        #[test]
        fn martingale_isometry(
            (l, vals) in (1u32..=6).prop_flat_map(|l| (Just(l), arb_exact(l, 3))),
            seed in any::<u64>(),
        ) {
            let f = Signal::new(l, 3, ValueKind::Vector, vals).unwrap();
            let e = NormPlugin::euclidean();
            let plain = martingale_transform(&f, &SignChoice::Constant(1), None).unwrap();
            let eps = SignChoice::Map(
                DyadicInterval::all(l - 1)
                    .map(|i| (i, if (seed >> ((i.k as u64 * 7 + i.pos) % 64)) & 1 == 1 { 1 } else { -1 }))
                    .collect(),
            );
            let signed = martingale_transform(&f, &eps, None).unwrap();
            prop_assert_eq!(
                crate::signal::lq_norm_pow(&plain, 2.0, &e),
                crate::signal::lq_norm_pow(&signed, 2.0, &e)
            );
        }
    }

    #[test]
    fn bitile_form_exhaustive_l2() {
        let u = BitileUniverse::new(2).unwrap();
        for basis in 0..4 {
            let f = Signal::scalar(2, (0..4).map(|j| Dyadic::from_int((j == basis) as i64)).collect()).unwrap();
            for code in 0..5u64.pow(4) {
                let ns = (0..4).map(|j| code / 5u64.pow(j) % 5).collect();
                let n = FrequencyChoice::new(2, ns).unwrap();
                assert_eq!(carleson_bitile(&f, &n, &u).unwrap(), carleson_direct(&f, &n).unwrap());
            }
        }
    }

    /// Bitiles left out of the universe contribute nothing: adding every
    /// bitile with `ω ⊆ [0, 2^{L+2})` (evaluated one level finer so the
    /// finest ones are resolved) changes no value.
    #[test]
    fn universe_truncation_is_sound() {
        for l in 1..=3u32 {
            let f = Signal::scalar(l, (0..1 << l).map(|j| Dyadic::from_small(j * j - 3, -1)).collect()).unwrap();
            let u = BitileUniverse::new(l).unwrap();
            for code in 0..40u64 {
                let ns: Vec<u64> = (0..1u64 << l).map(|j| (code * 7 + j * 5 + j * j * code) % ((1 << l) + 1)).collect();
                let n = FrequencyChoice::new(l, ns.clone()).unwrap();
                let fine = f.refine(1);
                let fine_n = FrequencyChoice::new(l + 1, ns.iter().flat_map(|&x| [x, x]).collect()).unwrap();
                let mut extended = Vec::new();
                for k in 0..=l + 1 {
                    for pos in 0..1u64 << k {
                        // |ω| = 2^{k+1}, ω ⊆ [0, 2^{L+2})
                        for m in 0..1u64 << (l + 1 - k) {
                            extended.push(Bitile::new(k, pos, m));
                        }
                    }
                }
                let big = bitile_sum(&fine, &fine_n, &extended).unwrap();
                let small = carleson_bitile(&f, &n, &u).unwrap().refine(1);
                assert_eq!(big, small);
            }
        }
    }
}
