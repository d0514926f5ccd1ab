//! Trees of bitiles, the tree identity sign `ε_PT`, density and size, and the
//! diagnostics of the tree estimate (stopping intervals `J` and the sets `G_J`).

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::certificate::{Backing, Certificate};
use crate::dyadic::{bitile_le, bitile_le_d, bitile_le_u, Bitile, DyadicInterval, Tile};
use crate::error::{Error, Result};
use crate::exec;
use crate::number::{Dyadic, Num, Scalar};
use crate::signal::{dot, scale_num, FrequencyChoice, LevelSet, NormPlugin, Signal, ValueKind};
use crate::walsh::{bit_reverse, haar_pattern, packet_pattern, walsh_at, PacketTable};

/// A top bitile and members below it in the order `≤`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    pub top: Bitile,
    pub members: Vec<Bitile>,
}

impl Tree {
    /// Members are sorted into canonical order and deduplicated.
    pub fn new(top: Bitile, members: impl IntoIterator<Item = Bitile>) -> Result<Tree> {
        let members: BTreeSet<Bitile> = members.into_iter().collect();
        for p in &members {
            if !bitile_le(p, &top) {
                return Err(Error::NotBelow {
                    p: *p,
                    top,
                    order: "≤",
                });
            }
        }
        Ok(Tree {
            top,
            members: members.into_iter().collect(),
        })
    }

    /// `{P ∈ coll : P ≤ top}`.
    pub fn complete(top: Bitile, coll: &[Bitile]) -> Tree {
        Tree::new(top, coll.iter().copied().filter(|p| bitile_le(p, &top))).expect("filtered")
    }

    /// `{P ∈ coll : P ≤_u top}`.
    pub fn complete_up(top: Bitile, coll: &[Bitile]) -> Tree {
        Tree::new(top, coll.iter().copied().filter(|p| bitile_le_u(p, &top))).expect("filtered")
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `|I_T|`.
    pub fn top_measure(&self) -> Dyadic {
        self.top.time.len()
    }

    pub fn is_up_tree(&self) -> bool {
        self.members.iter().all(|p| bitile_le_u(p, &self.top))
    }

    /// `{P ∈ 𝐓 : P ≤_u T}`, the part entering `Δ(𝐓)`.
    pub fn up_part(&self) -> Vec<Bitile> {
        self.members.iter().copied().filter(|p| bitile_le_u(p, &self.top)).collect()
    }

    /// `(𝐓_d, 𝐓_u)` with `𝐓_d = {P ≤_d T}` and `𝐓_u = 𝐓 \ 𝐓_d`.
    pub fn lemma_split(&self) -> (Vec<Bitile>, Vec<Bitile>) {
        self.members.iter().partition(|p| bitile_le_d(p, &self.top))
    }
}

/// `ε_PT`: the constant value on `I_P` of `Π_{i<k} r_i(·/|I_T|)^{n_i}`, where
/// `2^-k = |I_P|/|I_T|` and `n_T = Σ n_i 2^i` is the up-tile frequency of `T`.
pub fn epsilon_pt(p: &Bitile, t: &Bitile) -> Result<i8> {
    if !bitile_le_u(p, t) {
        return Err(Error::NotBelow {
            p: *p,
            top: *t,
            order: "≤_u",
        });
    }
    let k = p.k() - t.k();
    let n_t = 2 * t.m + 1;
    let low = if k >= 64 { n_t } else { n_t & ((1u64 << k) - 1) };
    // position of I_P inside I_T, i.e. the first k binary digits of x/|I_T|
    let rel = p.time.pos - (t.time.pos << k);
    let digits = bit_reverse(rel as usize, k) as u64;
    Ok(if (low & digits).count_ones() % 2 == 0 { 1 } else { -1 })
}

/// Smallest grid, at least `2^levels`, on which `w_{P_d}`, `h_{I_P}` and
/// `w_{T_u}^∞` are all constant on cells.
fn identity_resolution(p: &Bitile, t: &Bitile, levels: u32) -> u32 {
    let n_t = 2 * t.m + 1;
    let t_bits = 64 - n_t.leading_zeros();
    levels.max(p.k() + 1).max(t.k() + t_bits)
}

/// Checks `w_{P_d} = ε_PT · w_{T_u}^∞ · h_{I_P}` on every cell of the
/// finest grid the three functions need (never coarser than `2^levels`).
pub fn verify_tree_identity(p: &Bitile, t: &Bitile, levels: u32) -> Result<bool> {
    let eps = epsilon_pt(p, t)?;
    if p.k() > levels || !p.time.in_unit() {
        return Err(Error::TileOutOfGrid {
            tile: p.down(),
            levels,
        });
    }
    let r = identity_resolution(p, t, levels);
    let wd = packet_pattern(&p.down(), r)?;
    let wt = packet_pattern(&t.up(), r)?;
    let h = haar_pattern(&p.time, r)?;
    // both sides carry the same factor |I_P|^{-1/2}
    Ok((0..1usize << r).all(|j| wd[j] == eps * wt[j] * h[j]))
}

/// Checks `⟨f, w_{P_d}⟩ w_{P_d} = ⟨f w_{T_u}^∞, h_{I_P}⟩ h_{I_P} w_{T_u}^∞` on every cell.
pub fn verify_pairing_transfer<T: Scalar>(f: &Signal<T>, p: &Bitile, t: &Bitile) -> Result<bool> {
    epsilon_pt(p, t)?;
    let r = identity_resolution(p, t, f.levels());
    let f = f.refine(r - f.levels());
    let wd = packet_pattern(&p.down(), r)?;
    let wt = packet_pattern(&t.up(), r)?;
    let h = haar_pattern(&p.time, r)?;
    let cells = p.time.cells(r);
    let lhs_c = crate::walsh::pattern_pairing(&f, &wd, cells.clone());
    let twisted = f.mul_pattern(&wt);
    let rhs_c = crate::walsh::pattern_pairing(&twisted, &h, cells);
    // the common factor |I_P|^{-1} = 2^{k_P} is dropped from both sides
    Ok((0..1usize << r).all(|j| {
        lhs_c.iter().zip(&rhs_c).all(|(a, b)| {
            let l = if wd[j] == 1 { a.clone() } else if wd[j] == -1 { -a.clone() } else { T::zero() };
            let s = h[j] * wt[j];
            let rr = if s == 1 { b.clone() } else if s == -1 { -b.clone() } else { T::zero() };
            l == rr
        })
    }))
}

/// Number of frequency indices `m` per time interval at scale `k` whose
/// bitile frequency `ω` meets `[0, 2^L]`.
fn freq_slots(levels: u32, k: u32) -> u64 {
    if k < levels {
        (1u64 << (levels - k - 1)) + 1
    } else {
        1
    }
}

/// The fractions `|I_P' ∩ E_P'| / |I_P'|` for every bitile `P'` whose
/// frequency can contain some `N(x)`, and for every bitile `P` the ancestor
/// supremum `sup_{P' ≥ P}` of those fractions with a maximising witness.
///
/// The supremum is computed top-down: the bitiles immediately above
/// `(k, pos, m)` are `(k-1, pos/2, 2m)` and `(k-1, pos/2, 2m+1)`.
#[derive(Clone, Debug)]
pub struct DensityTable {
    levels: u32,
    measure_e: Dyadic,
    frac: Vec<Vec<Dyadic>>,
    sup: Vec<Vec<(Dyadic, Option<Bitile>)>>,
}

impl DensityTable {
    pub fn new(e: &LevelSet, nfun: &FrequencyChoice) -> Result<Self> {
        let l = e.levels();
        if nfun.levels() != l {
            return Err(Error::ResolutionMismatch {
                what: "frequency choice",
                expected: l,
                found: nfun.levels(),
            });
        }
        let mut counts: Vec<Vec<u64>> = (0..=l).map(|k| vec![0; (freq_slots(l, k) << k) as usize]).collect();
        for j in e.indices() {
            let n = nfun.at(j);
            for k in 0..=l {
                let m = n >> (k + 1);
                let slots = freq_slots(l, k);
                if m < slots {
                    let pos = (j >> (l - k)) as u64;
                    counts[k as usize][(pos * slots + m) as usize] += 1;
                }
            }
        }
        let frac: Vec<Vec<Dyadic>> = counts
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .map(|&c| Dyadic::from_int(c as i64).mul_pow2(k as i32 - l as i32))
                    .collect()
            })
            .collect();
        let mut sup: Vec<Vec<(Dyadic, Option<Bitile>)>> = Vec::with_capacity(l as usize + 1);
        for k in 0..=l {
            let slots = freq_slots(l, k);
            let row: Vec<(Dyadic, Option<Bitile>)> = (0..frac[k as usize].len())
                .map(|idx| {
                    let (pos, m) = (idx as u64 / slots, idx as u64 % slots);
                    let own = &frac[k as usize][idx];
                    let mut best = if own.is_zero() {
                        (Dyadic::zero(), None)
                    } else {
                        (own.clone(), Some(Bitile::new(k, pos, m)))
                    };
                    if k > 0 {
                        let up_slots = freq_slots(l, k - 1);
                        for mp in [2 * m, 2 * m + 1] {
                            if mp >= up_slots {
                                continue;
                            }
                            let cand = &sup[k as usize - 1][((pos / 2) * up_slots + mp) as usize];
                            if better(cand, &best) {
                                best = cand.clone();
                            }
                        }
                    }
                    best
                })
                .collect();
            sup.push(row);
        }
        Ok(DensityTable {
            levels: l,
            measure_e: e.measure(),
            frac,
            sup,
        })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// `|E|`.
    pub fn measure_e(&self) -> &Dyadic {
        &self.measure_e
    }

    /// `|I_P ∩ E_P| / |I_P|`.
    pub fn fraction(&self, p: &Bitile) -> Dyadic {
        match self.index(p) {
            Some((k, i)) => self.frac[k][i].clone(),
            None => Dyadic::zero(),
        }
    }

    /// `sup_{P' ≥ P} |I_P' ∩ E_P'| / |I_P'|` and a witness `P'` attaining it
    /// (coarsest first on ties), or `None` when the supremum is zero.
    pub fn ancestor_sup(&self, p: &Bitile) -> (Dyadic, Option<Bitile>) {
        match self.index(p) {
            Some((k, i)) => self.sup[k][i].clone(),
            None => (Dyadic::zero(), None),
        }
    }

    fn index(&self, p: &Bitile) -> Option<(usize, usize)> {
        let k = p.k();
        if k > self.levels || !p.time.in_unit() {
            return None;
        }
        let slots = freq_slots(self.levels, k);
        (p.m < slots).then(|| (k as usize, (p.time.pos * slots + p.m) as usize))
    }

    /// `density(coll)`.
    pub fn density(&self, coll: &[Bitile]) -> Dyadic {
        coll.iter()
            .map(|p| self.ancestor_sup(p).0)
            .max()
            .unwrap_or_else(Dyadic::zero)
    }
}

fn better(a: &(Dyadic, Option<Bitile>), b: &(Dyadic, Option<Bitile>)) -> bool {
    match a.0.cmp(&b.0) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => match (a.1, b.1) {
            (Some(x), Some(y)) => x < y,
            (Some(_), None) => true,
            _ => false,
        },
    }
}

/// `density(coll)` for the set `E` and linearisation `N`.
pub fn density(coll: &[Bitile], e: &LevelSet, nfun: &FrequencyChoice) -> Result<Dyadic> {
    Ok(DensityTable::new(e, nfun)?.density(coll))
}

/// Largest complete up-tree value `Δ^q` and the tree attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeResult {
    /// `size^q`.
    pub value_pow: Num,
    pub witness: Option<Tree>,
}

impl SizeResult {
    pub fn value(&self, q: f64) -> f64 {
        self.value_pow.root(q)
    }
}

/// Evaluates `Δ(𝐓)` for trees of bitiles against one signal.
#[derive(Clone, Debug)]
pub struct SizeEngine<T> {
    table: PacketTable<T>,
    kind: ValueKind,
    dim: usize,
    q: f64,
    plugin: NormPlugin,
}

impl<T: Scalar> SizeEngine<T> {
    pub fn new(f: &Signal<T>, q: f64, plugin: &NormPlugin) -> Result<Self> {
        plugin.check_kind(f.kind(), f.dim())?;
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidNorm(format!("exponent q = {q} must lie in [1, ∞)")));
        }
        Ok(SizeEngine {
            table: PacketTable::new(f),
            kind: f.kind(),
            dim: f.dim(),
            q,
            plugin: *plugin,
        })
    }

    pub fn levels(&self) -> u32 {
        self.table.levels()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn plugin(&self) -> &NormPlugin {
        &self.plugin
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn table(&self) -> &PacketTable<T> {
        &self.table
    }

    /// `⟨f, w_{P_d}^∞⟩`, `None` when it vanishes.
    pub fn coefficient(&self, p: &Bitile) -> Option<&[T]> {
        self.table
            .coefficient(&p.down())
            .filter(|c| c.iter().any(|x| !x.is_zero()))
    }

    pub fn is_zero(&self, p: &Bitile) -> bool {
        self.coefficient(p).is_none()
    }

    /// `Σ_P ⟨f, w_{P_d}⟩ w_{P_d}` on the cells of `region`.
    pub fn packet_sum(&self, members: &[Bitile], region: &DyadicInterval) -> Vec<T> {
        let l = self.levels();
        let w = self.table.width();
        let base = region.cells(l).start;
        let mut buf = vec![T::zero(); region.cells(l).len() * w];
        for p in members {
            let Some(c) = self.coefficient(p) else { continue };
            let k = p.k();
            let scaled: Vec<T> = c.iter().map(|x| x.mul_pow2(k as i32)).collect();
            for (t, j) in p.time.cells(l).enumerate() {
                if !region.contains_cell(l, j) {
                    continue;
                }
                let row = &mut buf[(j - base) * w..(j - base + 1) * w];
                if walsh_at(2 * p.m, t, l - k) == 1 {
                    row.iter_mut().zip(&scaled).for_each(|(a, v)| *a += v.clone());
                } else {
                    row.iter_mut().zip(&scaled).for_each(|(a, v)| *a -= v.clone());
                }
            }
        }
        buf
    }

    /// `Δ^q = |I_T|^-1 ∫ ‖Σ_P ⟨f,w_{P_d}⟩ w_{P_d}‖^q` for members `P ≤_u T`.
    ///
    /// Hilbert norms with `q = 2` use orthogonality of the `w_{P_d}`:
    /// `Δ² = |I_T|^-1 Σ_P ‖⟨f, w_{P_d}⟩‖²`.
    pub fn delta_pow(&self, top: &Bitile, members: &[Bitile]) -> Num {
        if self.plugin.is_hilbert() && self.q == 2.0 {
            self.delta_pow_parseval(top, members)
        } else {
            self.delta_pow_direct(top, members)
        }
    }

    pub fn delta_pow_parseval(&self, top: &Bitile, members: &[Bitile]) -> Num {
        let sum: Num = members
            .iter()
            .filter_map(|p| self.coefficient(p).map(|c| scale_num(dot(c, c).to_num(), p.k() as i32)))
            .sum();
        scale_num(sum, top.k() as i32)
    }

    pub fn delta_pow_direct(&self, top: &Bitile, members: &[Bitile]) -> Num {
        let l = self.levels();
        let region = if top.k() <= l { top.time } else { top.time.ancestor(l) };
        let buf = self.packet_sum(members, &region);
        let w = self.table.width();
        let sum: Num = buf
            .chunks(w)
            .map(|v| self.plugin.norm_pow(v, self.kind, self.dim, self.q))
            .sum();
        scale_num(sum, top.k() as i32 - l as i32)
    }

    /// Candidate tops with their complete up-trees in `coll`; bitiles with a
    /// zero coefficient are left out since they cannot change `Δ`.
    pub fn up_trees(&self, coll: &[Bitile]) -> BTreeMap<Bitile, Vec<Bitile>> {
        let mut map: BTreeMap<Bitile, Vec<Bitile>> = BTreeMap::new();
        for p in coll {
            if self.is_zero(p) {
                continue;
            }
            for t in p.up_tops() {
                map.entry(t).or_default().push(*p);
            }
        }
        for v in map.values_mut() {
            v.sort();
            v.dedup();
        }
        map
    }

    /// Computed `size(coll)`: the largest `Δ` over complete up-trees, ties
    /// resolved towards the canonically smallest top.
    pub fn size(&self, coll: &[Bitile]) -> SizeResult {
        let trees: Vec<(Bitile, Vec<Bitile>)> = self.up_trees(coll).into_iter().collect();
        let deltas = exec::map_slice(&trees, |(t, m)| self.delta_pow(t, m));
        let mut best: Option<(Num, usize)> = None;
        for (i, d) in deltas.into_iter().enumerate() {
            if best.as_ref().is_none_or(|(b, _)| d.gt(b)) {
                best = Some((d, i));
            }
        }
        match best {
            Some((value_pow, i)) if !value_pow.is_zero() => {
                let (top, members) = trees[i].clone();
                SizeResult {
                    value_pow,
                    witness: Some(Tree { top, members }),
                }
            }
            _ => SizeResult {
                value_pow: Num::zero(),
                witness: None,
            },
        }
    }

    /// `Δ(𝐓)^q` with `𝐓_u = {P ∈ 𝐓 : P ≤_u T}`.
    pub fn tree_delta_pow(&self, tree: &Tree) -> Num {
        self.delta_pow(&tree.top, &tree.up_part())
    }
}

/// The largest `Δ^q` over every up-tree contained in `coll` (every subset
/// and every admissible top). Exponential; for cross-checking only.
pub fn exhaustive_size_pow<T: Scalar>(engine: &SizeEngine<T>, coll: &[Bitile]) -> Result<Num> {
    if coll.len() > 16 {
        return Err(Error::Precondition("exhaustive size is limited to 16 bitiles".into()));
    }
    let tops: BTreeSet<Bitile> = coll.iter().flat_map(|p| p.up_tops().collect::<Vec<_>>()).collect();
    let mut best = Num::zero();
    for mask in 1u32..1 << coll.len() {
        let subset: Vec<Bitile> = (0..coll.len()).filter(|i| mask >> i & 1 == 1).map(|i| coll[i]).collect();
        for t in &tops {
            if subset.iter().all(|p| bitile_le_u(p, t)) {
                best = best.max(engine.delta_pow_direct(t, &subset));
            }
        }
    }
    Ok(best)
}

/// `⟨w_{P_d}^∞, g 1_{E_{P_u}}⟩` for every bitile where it can be nonzero.
///
/// For a cell `x ∈ E` and a scale `k`, `N(x) ∈ ω_{P_u}` singles out at most
/// one bitile with `x ∈ I_P`: the one with `N(x) >> k = 2m + 1`.
#[derive(Clone, Debug)]
pub struct DualTable<T> {
    width: usize,
    map: HashMap<Bitile, Vec<T>>,
}

impl<T: Scalar> DualTable<T> {
    pub fn new(g: &Signal<T>, e: &LevelSet, nfun: &FrequencyChoice) -> Result<Self> {
        let l = g.levels();
        for (what, found) in [("level set", e.levels()), ("frequency choice", nfun.levels())] {
            if found != l {
                return Err(Error::ResolutionMismatch {
                    what,
                    expected: l,
                    found,
                });
            }
        }
        let w = g.width();
        let mut map: HashMap<Bitile, Vec<T>> = HashMap::new();
        for j in e.indices() {
            let n = nfun.at(j);
            for k in 0..=l {
                let s = n >> k;
                if s & 1 == 0 {
                    continue;
                }
                let time = DyadicInterval::cell(l, j).ancestor(k);
                let p = Bitile { time, m: (s - 1) / 2 };
                let local = j - time.cells(l).start;
                let sign = walsh_at(2 * p.m, local, l - k);
                let acc = map.entry(p).or_insert_with(|| vec![T::zero(); w]);
                for (a, x) in acc.iter_mut().zip(g.cell(j)) {
                    let v = x.mul_pow2(-(l as i32));
                    if sign == 1 {
                        *a += v;
                    } else {
                        *a -= v;
                    }
                }
            }
        }
        Ok(DualTable { width: w, map })
    }

    pub fn get(&self, p: &Bitile) -> Option<&[T]> {
        self.map.get(p).map(|v| v.as_slice())
    }

    pub fn width(&self) -> usize {
        self.width
    }
}

/// `|⟨f, w_{P_d}⟩ ⟨w_{P_d}, g 1_{E_{P_u}}⟩| = 2^{k_P} |⟨c_f, c_g⟩|`.
pub fn form_term<T: Scalar>(engine: &SizeEngine<T>, dual: &DualTable<T>, p: &Bitile) -> T {
    match (engine.coefficient(p), dual.get(p)) {
        (Some(cf), Some(cg)) => dot(cf, cg).mul_pow2(p.k() as i32),
        _ => T::zero(),
    }
}

/// The maximal dyadic `J ⊆ ⋃ I_P` containing no `I_P`. When some `I_P` is a
/// single grid cell, the intervals below it are half-cells (scale `L + 1`).
pub fn stopping_intervals(members: &[Bitile]) -> Vec<DyadicInterval> {
    let times: BTreeSet<DyadicInterval> = members.iter().map(|p| p.time).collect();
    let mut holds: BTreeSet<DyadicInterval> = BTreeSet::new();
    for t in &times {
        for k in 0..=t.k {
            holds.insert(t.ancestor(k));
        }
    }
    let roots: Vec<DyadicInterval> = times
        .iter()
        .copied()
        .filter(|t| (0..t.k).all(|k| !times.contains(&t.ancestor(k))))
        .collect();
    let mut out = Vec::new();
    let mut stack: Vec<DyadicInterval> = roots.into_iter().rev().collect();
    while let Some(j) = stack.pop() {
        if holds.contains(&j) {
            let [a, b] = j.children();
            stack.push(b);
            stack.push(a);
        } else {
            out.push(j);
        }
    }
    out
}

/// `G_J` for one stopping interval, with its measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StoppingEntry {
    pub interval: DyadicInterval,
    pub measure: Dyadic,
    pub g_measure: Dyadic,
}

/// `|G_J|` with `G_J = J ∩ ⋃_{P ∈ 𝐓, I_P ⊋ J} E_{P_u}`, for every `J`.
pub fn stopping_sets(members: &[Bitile], e: &LevelSet, nfun: &FrequencyChoice) -> Vec<StoppingEntry> {
    let l = e.levels();
    let mut by_time: HashMap<DyadicInterval, Vec<Bitile>> = HashMap::new();
    for p in members {
        by_time.entry(p.time).or_default().push(*p);
    }
    stopping_intervals(members)
        .into_iter()
        .map(|j| {
            let above: Vec<Bitile> = (0..j.k)
                .filter_map(|k| by_time.get(&j.ancestor(k)))
                .flatten()
                .copied()
                .collect();
            let hit = |cell: usize| {
                e.contains(cell) && above.iter().any(|p| p.up().freq().contains_point(nfun.at(cell)))
            };
            let g_measure = if j.k > l {
                let cell = j.ancestor(l).cells(l).start;
                if hit(cell) {
                    j.len()
                } else {
                    Dyadic::zero()
                }
            } else {
                let c = j.cells(l).filter(|&x| hit(x)).count();
                Dyadic::from_int(c as i64).mul_pow2(-(l as i32))
            };
            StoppingEntry {
                interval: j,
                measure: j.len(),
                g_measure,
            }
        })
        .collect()
}

/// `|G_J| ≤ 2 density(𝐓) |J|` for every stopping interval of the tree.
pub fn gj_certificates(tree: &Tree, table: &DensityTable, nfun: &FrequencyChoice, e: &LevelSet) -> Vec<Certificate> {
    let dens = table.density(&tree.members);
    stopping_sets(&tree.members, e, nfun)
        .into_iter()
        .map(|s| {
            let rhs = (&dens * &s.measure).mul_pow2(1);
            Certificate::new("g_j", Num::Exact(s.g_measure), Num::Exact(rhs), Backing::Theorem)
                .with("J", s.interval)
                .with("top", tree.top)
        })
        .collect()
}

/// Terms of the tree estimate for one tree.
#[derive(Clone, Debug, Serialize)]
pub struct TreeFormReport {
    pub top: Bitile,
    pub members: usize,
    /// `Σ_{P∈𝐓} |⟨f,w_{P_d}⟩⟨w_{P_d}, g 1_{E_{P_u}}⟩|`.
    pub lhs: Num,
    pub lhs_down: Num,
    pub lhs_up: Num,
    pub size: f64,
    pub density: Dyadic,
    pub top_measure: Dyadic,
    /// `lhs / (size · density · |I_T|)`.
    pub ratio: f64,
    pub stopping: Vec<StoppingEntry>,
    pub certificates: Vec<Certificate>,
}

/// Evaluates the left side of the tree estimate exactly and reports the ratio
/// against `size(𝐓) density(𝐓) |I_T|` with both computed on the members.
pub fn tree_form_sum<T: Scalar>(
    tree: &Tree,
    engine: &SizeEngine<T>,
    dual: &DualTable<T>,
    table: &DensityTable,
    e: &LevelSet,
    nfun: &FrequencyChoice,
) -> TreeFormReport {
    let term = |p: &Bitile| form_term(engine, dual, p).abs_val().to_num();
    let (down, up) = tree.lemma_split();
    let lhs_down: Num = down.iter().map(term).sum();
    let lhs_up: Num = up.iter().map(term).sum();
    let lhs = lhs_down.clone() + lhs_up.clone();
    let size = engine.size(&tree.members).value(engine.q());
    let density = table.density(&tree.members);
    let top_measure = tree.top_measure();
    let denom = size * density.to_f64() * top_measure.to_f64();
    let ratio = if lhs.is_zero() { 0.0 } else { lhs.to_f64() / denom };
    TreeFormReport {
        top: tree.top,
        members: tree.len(),
        lhs,
        lhs_down,
        lhs_up,
        size,
        density,
        top_measure,
        ratio,
        stopping: stopping_sets(&tree.members, e, nfun),
        certificates: gj_certificates(tree, table, nfun, e),
    }
}

/// Whether the rectangles `P_d` of the given (bitile, tree index) pairs are
/// pairwise disjoint; returns the first overlapping pair otherwise.
pub fn down_tile_overlap(pairs: &[(Bitile, usize)]) -> Option<(Bitile, Bitile)> {
    let tiles: Vec<Tile> = pairs.iter().map(|(p, _)| p.down()).collect();
    for i in 0..tiles.len() {
        for j in i + 1..tiles.len() {
            if crate::dyadic::tiles_intersect(&tiles[i], &tiles[j]) {
                return Some((pairs[i].0, pairs[j].0));
            }
        }
    }
    None
}
