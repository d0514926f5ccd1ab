//! Vector- and matrix-valued signals on a `2^L` grid, norm plugins, level
//! sets, frequency choices, and the dyadic maximal and BMO functionals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicInterval;
use crate::error::{Error, Result};
use crate::exec;
use crate::linalg;
use crate::number::{Dyadic, Num, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Vector,
    Matrix,
}

impl ValueKind {
    /// Number of scalars per sample for dimension `dim`.
    pub fn width(self, dim: usize) -> usize {
        match self {
            ValueKind::Vector => dim,
            ValueKind::Matrix => dim * dim,
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Vector => "vector",
            ValueKind::Matrix => "matrix",
        })
    }
}

impl FromStr for ValueKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vector" => Ok(ValueKind::Vector),
            "matrix" => Ok(ValueKind::Matrix),
            _ => Err(Error::Parse(format!("unknown kind `{s}`"))),
        }
    }
}

/// A function on `[0,1)` constant on the cells `[j 2^-L, (j+1) 2^-L)`, with
/// values in `R^d` or in `d × d` matrices (stored row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Signal<T> {
    levels: u32,
    dim: usize,
    kind: ValueKind,
    data: Vec<T>,
}

impl<T: Scalar> Signal<T> {
    pub fn new(levels: u32, dim: usize, kind: ValueKind, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("dimension must be positive".into()));
        }
        let expected = (1usize << levels) * kind.width(dim);
        if data.len() != expected {
            return Err(Error::Shape(format!(
                "expected {} scalars for 2^{levels} cells of {kind} values of dimension {dim}, found {}",
                expected,
                data.len()
            )));
        }
        Ok(Signal {
            levels,
            dim,
            kind,
            data,
        })
    }

    pub fn zeros(levels: u32, dim: usize, kind: ValueKind) -> Self {
        let n = (1usize << levels) * kind.width(dim);
        Signal {
            levels,
            dim,
            kind,
            data: vec![T::zero(); n],
        }
    }

    /// A scalar (`d = 1`) signal.
    pub fn scalar(levels: u32, values: Vec<T>) -> Result<Self> {
        Self::new(levels, 1, ValueKind::Vector, values)
    }

    pub fn constant(levels: u32, dim: usize, kind: ValueKind, value: &[T]) -> Result<Self> {
        if value.len() != kind.width(dim) {
            return Err(Error::Shape("constant value has the wrong width".into()));
        }
        let data = (0..1usize << levels).flat_map(|_| value.iter().cloned()).collect();
        Self::new(levels, dim, kind, data)
    }

    pub fn from_cells(levels: u32, dim: usize, kind: ValueKind, f: impl Fn(usize) -> Vec<T>) -> Result<Self> {
        let w = kind.width(dim);
        let mut data = Vec::with_capacity(w << levels);
        for j in 0..1usize << levels {
            let v = f(j);
            if v.len() != w {
                return Err(Error::Shape(format!("cell {j} has width {}, expected {w}", v.len())));
            }
            data.extend(v);
        }
        Self::new(levels, dim, kind, data)
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn width(&self) -> usize {
        self.kind.width(self.dim)
    }

    pub fn n_cells(&self) -> usize {
        1 << self.levels
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn cell(&self, j: usize) -> &[T] {
        let w = self.width();
        &self.data[j * w..(j + 1) * w]
    }

    pub fn cell_mut(&mut self, j: usize) -> &mut [T] {
        let w = self.width();
        &mut self.data[j * w..(j + 1) * w]
    }

    pub fn same_shape<U>(&self, other: &Signal<U>) -> bool {
        self.levels == other.levels && self.dim == other.dim && self.kind == other.kind
    }

    pub fn ensure_same_shape<U>(&self, other: &Signal<U>) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "signals differ: (L={}, d={}, {}) vs (L={}, d={}, {})",
                self.levels, self.dim, self.kind, other.levels, other.dim, other.kind
            )))
        }
    }

    pub fn add(&self, other: &Signal<T>) -> Result<Signal<T>> {
        self.ensure_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Signal<T>) -> Result<Signal<T>> {
        self.ensure_same_shape(other)?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    fn zip_with(&self, other: &Signal<T>, f: impl Fn(&T, &T) -> T) -> Signal<T> {
        Signal {
            levels: self.levels,
            dim: self.dim,
            kind: self.kind,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Signal<T> {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Signal<T> {
        Signal {
            levels: self.levels,
            dim: self.dim,
            kind: self.kind,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Multiplies cell `j` by `signs[j] ∈ {-1, 0, +1}`.
    pub fn mul_pattern(&self, signs: &[i8]) -> Signal<T> {
        assert_eq!(signs.len(), self.n_cells());
        let w = self.width();
        let mut out = self.clone();
        for (j, &s) in signs.iter().enumerate() {
            for x in &mut out.data[j * w..(j + 1) * w] {
                match s {
                    1 => {}
                    -1 => *x = -x.clone(),
                    _ => *x = T::zero(),
                }
            }
        }
        out
    }

    /// Zero outside `set`.
    pub fn restrict(&self, set: &LevelSet) -> Result<Signal<T>> {
        if set.levels() != self.levels {
            return Err(Error::ResolutionMismatch {
                what: "level set",
                expected: self.levels,
                found: set.levels(),
            });
        }
        let pattern: Vec<i8> = (0..self.n_cells()).map(|j| set.contains(j) as i8).collect();
        Ok(self.mul_pattern(&pattern))
    }

    /// Cells where the value is not identically zero.
    pub fn support(&self) -> LevelSet {
        LevelSet::from_fn(self.levels, |j| self.cell(j).iter().any(|x| !x.is_zero()))
    }

    pub fn to_f64(&self) -> Signal<f64> {
        Signal {
            levels: self.levels,
            dim: self.dim,
            kind: self.kind,
            data: self.data.iter().map(|x| x.to_f64()).collect(),
        }
    }

    /// The same function sampled on the `2^(L+extra)` grid.
    pub fn refine(&self, extra: u32) -> Signal<T> {
        let w = self.width();
        let rep = 1usize << extra;
        let mut data = Vec::with_capacity(self.data.len() * rep);
        for j in 0..self.n_cells() {
            for _ in 0..rep {
                data.extend_from_slice(&self.data[j * w..(j + 1) * w]);
            }
        }
        Signal {
            levels: self.levels + extra,
            dim: self.dim,
            kind: self.kind,
            data,
        }
    }

    /// Cellwise dual pairing `⟨self(x), other(x)⟩` (dot product for vectors,
    /// `tr(AᵀB)` for matrices, both equal to the flattened dot product).
    pub fn pairing_at(&self, other: &Signal<T>, j: usize) -> T {
        dot(self.cell(j), other.cell(j))
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        acc += x.clone() * y.clone();
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    Euclidean,
    Lp(f64),
    Schatten(f64),
}

/// A concrete finite-dimensional norm together with the tile-type exponent
/// it is declared to have.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormPlugin {
    pub kind: NormKind,
    pub tile_type: f64,
}

impl NormPlugin {
    pub fn euclidean() -> Self {
        NormPlugin {
            kind: NormKind::Euclidean,
            tile_type: 2.0,
        }
    }

    pub fn lp(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(NormPlugin {
            kind: NormKind::Lp(p),
            tile_type: default_tile_type(p),
        })
    }

    pub fn schatten(p: f64) -> Result<Self> {
        check_exponent(p)?;
        Ok(NormPlugin {
            kind: NormKind::Schatten(p),
            tile_type: default_tile_type(p),
        })
    }

    pub fn with_tile_type(mut self, q: f64) -> Result<Self> {
        if !(q >= 2.0) || !q.is_finite() {
            return Err(Error::InvalidNorm(format!("tile-type exponent {q} must be a finite real ≥ 2")));
        }
        self.tile_type = q;
        Ok(self)
    }

    /// Inner-product norms: Euclidean, `ℓ^2`, and Schatten-2 (Frobenius).
    pub fn is_hilbert(&self) -> bool {
        match self.kind {
            NormKind::Euclidean => true,
            NormKind::Lp(p) | NormKind::Schatten(p) => p == 2.0,
        }
    }

    /// The norm of the dual space under the flattened dot-product pairing.
    pub fn dual(&self) -> NormPlugin {
        let kind = match self.kind {
            NormKind::Euclidean => NormKind::Euclidean,
            NormKind::Lp(p) => NormKind::Lp(conjugate(p)),
            NormKind::Schatten(p) => NormKind::Schatten(conjugate(p)),
        };
        NormPlugin {
            kind,
            tile_type: self.tile_type,
        }
    }

    pub fn check_kind(&self, kind: ValueKind, dim: usize) -> Result<()> {
        if matches!(self.kind, NormKind::Schatten(_)) && kind != ValueKind::Matrix && dim != 1 {
            return Err(Error::Shape(format!("{self} needs matrix values")));
        }
        Ok(())
    }

    /// Norm of one sample of the given shape.
    pub fn value_norm<T: Scalar>(&self, v: &[T], kind: ValueKind, dim: usize) -> f64 {
        debug_assert_eq!(v.len(), kind.width(dim));
        match self.kind {
            NormKind::Euclidean => v.iter().map(|x| x.to_f64().powi(2)).sum::<f64>().sqrt(),
            NormKind::Lp(p) => {
                let m = v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
                if m == 0.0 {
                    return 0.0;
                }
                m * v.iter().map(|x| (x.to_f64().abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
            NormKind::Schatten(p) => {
                if kind == ValueKind::Vector {
                    // a 1x1 matrix
                    return v[0].to_f64().abs();
                }
                let a: Vec<f64> = v.iter().map(|x| x.to_f64()).collect();
                let sv = linalg::singular_values(&a, dim);
                let m = sv.first().copied().unwrap_or(0.0);
                if m == 0.0 {
                    return 0.0;
                }
                m * sv.iter().map(|s| (s / m).powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }

    /// Whether `‖v‖^q` is computed exactly for exact samples of this width.
    pub fn exact_power(&self, width: usize, q: f64) -> bool {
        (width == 1 && q >= 2.0 && q.fract() == 0.0 && (q as u64) % 2 == 0)
            || (self.is_hilbert() && q == 2.0)
    }

    /// `‖v‖^q`, exact when the samples are exact and
    /// [`exact_power`](Self::exact_power) holds.
    pub fn norm_pow<T: Scalar>(&self, v: &[T], kind: ValueKind, dim: usize, q: f64) -> Num {
        if T::EXACT && self.exact_power(v.len(), q) {
            if v.len() == 1 {
                let mut acc = T::one();
                for _ in 0..q as u32 {
                    acc = acc * v[0].clone();
                }
                return acc.to_num();
            }
            return dot(v, v).to_num();
        }
        Num::Float(self.value_norm(v, kind, dim).powf(q))
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidNorm(format!("exponent {p} must lie in (1, ∞)")))
    }
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// Hilbert norms get 2; otherwise the least integer exceeding `max(p, p')`,
/// the range where `L^p`-type norms are known to have that tile-type.
fn default_tile_type(p: f64) -> f64 {
    if p == 2.0 {
        2.0
    } else {
        (p.max(conjugate(p)).floor() + 1.0).max(2.0)
    }
}

impl fmt::Display for NormPlugin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NormKind::Euclidean => f.write_str("euclidean"),
            NormKind::Lp(p) => write!(f, "lp:{p}"),
            NormKind::Schatten(p) => write!(f, "schatten:{p}"),
        }
    }
}

impl FromStr for NormPlugin {
    type Err = Error;

    /// `euclidean`, `lp:<p>`, or `schatten:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidNorm(format!("cannot parse norm `{s}`"));
        match s.split_once(':') {
            None if s == "euclidean" => Ok(NormPlugin::euclidean()),
            Some(("lp", p)) => NormPlugin::lp(p.parse().map_err(|_| bad())?),
            Some(("schatten", p)) => NormPlugin::schatten(p.parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// `‖f‖_{L^q}^q = 2^-L Σ_j ‖f_j‖^q` (finite `q`).
pub fn lq_norm_pow<T: Scalar>(f: &Signal<T>, q: f64, plugin: &NormPlugin) -> Num {
    let sum: Num = (0..f.n_cells())
        .map(|j| plugin.norm_pow(f.cell(j), f.kind(), f.dim(), q))
        .sum();
    scale_num(sum, -(f.levels() as i32))
}

/// `‖f‖_{L^q}`; `q = ∞` gives the maximum sample norm.
pub fn lq_norm<T: Scalar>(f: &Signal<T>, q: f64, plugin: &NormPlugin) -> f64 {
    if q.is_infinite() {
        return (0..f.n_cells())
            .map(|j| plugin.value_norm(f.cell(j), f.kind(), f.dim()))
            .fold(0.0, f64::max);
    }
    lq_norm_pow(f, q, plugin).root(q)
}

pub(crate) fn scale_num(x: Num, e: i32) -> Num {
    match x {
        Num::Exact(d) => Num::Exact(d.mul_pow2(e)),
        Num::Float(v) => Num::Float(v.mul_pow2(e)),
    }
}

/// Per-cell norms as a scalar signal.
pub fn pointwise_norm<T: Scalar>(f: &Signal<T>, plugin: &NormPlugin) -> Signal<f64> {
    let vals = exec::map_range(f.n_cells(), |j| plugin.value_norm(f.cell(j), f.kind(), f.dim()));
    Signal::scalar(f.levels(), vals).expect("shape preserved")
}

/// Averages over every dyadic interval: entry `k` has the `2^k` averages at
/// scale `k`, for `k = 0..=levels`.
pub fn dyadic_averages<T: Scalar>(levels: u32, values: &[T]) -> Vec<Vec<T>> {
    assert_eq!(values.len(), 1 << levels);
    let mut out = vec![values.to_vec()];
    for _ in 0..levels {
        let prev = out.last().unwrap();
        let next: Vec<T> = prev
            .chunks(2)
            .map(|c| (c[0].clone() + c[1].clone()).mul_pow2(-1))
            .collect();
        out.push(next);
    }
    out.reverse();
    out
}

/// Dyadic maximal function of non-negative cell values:
/// `M(j) = max_{I ∋ cell j} avg_I`.
pub fn maximal_of<T: Scalar>(levels: u32, values: &[T]) -> Vec<T> {
    let avgs = dyadic_averages(levels, values);
    (0..1usize << levels)
        .map(|j| {
            let mut best = avgs[0][0].clone();
            for (k, row) in avgs.iter().enumerate().skip(1) {
                let a = &row[j >> (levels as usize - k)];
                if *a > best {
                    best = a.clone();
                }
            }
            best
        })
        .collect()
}

/// Dyadic maximal function of `x ↦ ‖f(x)‖`.
pub fn maximal_function<T: Scalar>(f: &Signal<T>, plugin: &NormPlugin) -> Signal<f64> {
    let norms = pointwise_norm(f, plugin);
    Signal::scalar(f.levels(), maximal_of(f.levels(), norms.data())).expect("shape preserved")
}

/// Exact dyadic maximal function of an indicator.
pub fn maximal_indicator(set: &LevelSet) -> Vec<Dyadic> {
    let vals: Vec<Dyadic> = (0..set.n_cells()).map(|j| Dyadic::from_int(set.contains(j) as i64)).collect();
    maximal_of(set.levels(), &vals)
}

/// Average of `f` over `k` (componentwise).
pub fn interval_average<T: Scalar>(f: &Signal<T>, k: &DyadicInterval) -> Vec<T> {
    let w = f.width();
    let mut acc = vec![T::zero(); w];
    for j in k.cells(f.levels()) {
        for (a, x) in acc.iter_mut().zip(f.cell(j)) {
            *a += x.clone();
        }
    }
    let shift = -((f.levels() - k.k) as i32);
    acc.into_iter().map(|a| a.mul_pow2(shift)).collect()
}

/// Dyadic BMO norm with `L^1` mean oscillation:
/// `max_K |K|^-1 ∫_K ‖f − avg_K f‖`.
pub fn bmo_norm<T: Scalar>(f: &Signal<T>, plugin: &NormPlugin) -> f64 {
    let intervals: Vec<DyadicInterval> = DyadicInterval::all(f.levels()).collect();
    let osc = exec::map_slice(&intervals, |k| {
        let avg = interval_average(f, k);
        let cells = k.cells(f.levels());
        let n = cells.len() as f64;
        let total: f64 = cells
            .map(|j| {
                let diff: Vec<T> = f.cell(j).iter().zip(&avg).map(|(x, a)| x.clone() - a.clone()).collect();
                plugin.value_norm(&diff, f.kind(), f.dim())
            })
            .sum();
        total / n
    });
    osc.into_iter().fold(0.0, f64::max)
}

/// A union of grid cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LevelSet {
    levels: u32,
    cells: Vec<bool>,
}

impl LevelSet {
    pub fn empty(levels: u32) -> Self {
        LevelSet {
            levels,
            cells: vec![false; 1 << levels],
        }
    }

    pub fn full(levels: u32) -> Self {
        LevelSet {
            levels,
            cells: vec![true; 1 << levels],
        }
    }

    pub fn from_fn(levels: u32, f: impl Fn(usize) -> bool) -> Self {
        LevelSet {
            levels,
            cells: (0..1usize << levels).map(f).collect(),
        }
    }

    pub fn from_indices(levels: u32, idx: &[usize]) -> Result<Self> {
        let mut s = Self::empty(levels);
        for &j in idx {
            if j >= s.cells.len() {
                return Err(Error::Shape(format!("cell index {j} outside 2^{levels} grid")));
            }
            s.cells[j] = true;
        }
        Ok(s)
    }

    /// The cells of a dyadic interval.
    pub fn from_interval(levels: u32, i: &DyadicInterval) -> Self {
        let r = i.cells(levels);
        Self::from_fn(levels, |j| r.contains(&j))
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.cells[j]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// `popcount · 2^-L`.
    pub fn measure(&self) -> Dyadic {
        Dyadic::from_int(self.count() as i64).mul_pow2(-(self.levels as i32))
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&j| self.cells[j]).collect()
    }

    pub fn difference(&self, other: &LevelSet) -> LevelSet {
        LevelSet::from_fn(self.levels, |j| self.cells[j] && !other.cells[j])
    }

    pub fn intersection(&self, other: &LevelSet) -> LevelSet {
        LevelSet::from_fn(self.levels, |j| self.cells[j] && other.cells[j])
    }

    pub fn is_subset(&self, other: &LevelSet) -> bool {
        self.cells.iter().zip(&other.cells).all(|(a, b)| !a || *b)
    }

    /// Number of member cells inside the interval `i` (scale `≤ levels`).
    pub fn count_in(&self, i: &DyadicInterval) -> usize {
        i.cells(self.levels).filter(|&j| self.cells[j]).count()
    }

    /// Bitstring form, cell 0 first.
    pub fn to_bitstring(&self) -> String {
        self.cells.iter().map(|&c| if c { '1' } else { '0' }).collect()
    }
}

/// The linearising frequency `N(x)`, one integer per cell in `0..=2^L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrequencyChoice {
    levels: u32,
    values: Vec<u64>,
}

impl FrequencyChoice {
    pub fn new(levels: u32, values: Vec<u64>) -> Result<Self> {
        if values.len() != 1 << levels {
            return Err(Error::Shape(format!(
                "frequency choice has {} entries, expected 2^{levels}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v > 1 << levels) {
            return Err(Error::Precondition(format!("frequency {v} exceeds 2^{levels}")));
        }
        Ok(FrequencyChoice { levels, values })
    }

    pub fn constant(levels: u32, n: u64) -> Result<Self> {
        Self::new(levels, vec![n; 1 << levels])
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn at(&self, j: usize) -> u64 {
        self.values[j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn value_norm_examples() {
        let e = NormPlugin::euclidean();
        assert_eq!(e.value_norm(&[3.0, 4.0], ValueKind::Vector, 2), 5.0);
        let s2 = NormPlugin::schatten(2.0).unwrap();
        let id = [1.0, 0.0, 0.0, 1.0];
        assert!((s2.value_norm(&id, ValueKind::Matrix, 2) - 2f64.sqrt()).abs() < 1e-15);
        let l = NormPlugin::lp(1.5).unwrap();
        assert!((l.value_norm(&[1.0, 1.0], ValueKind::Vector, 2) - 2f64.powf(2.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn norm_parsing() {
        assert_eq!("euclidean".parse::<NormPlugin>().unwrap(), NormPlugin::euclidean());
        assert_eq!("lp:4".parse::<NormPlugin>().unwrap().kind, NormKind::Lp(4.0));
        assert_eq!("schatten:3".parse::<NormPlugin>().unwrap().tile_type, 4.0);
        assert!("lp:1".parse::<NormPlugin>().is_err());
        assert!("lp:x".parse::<NormPlugin>().is_err());
        assert!("sup".parse::<NormPlugin>().is_err());
        assert_eq!(NormPlugin::lp(4.0).unwrap().dual().kind, NormKind::Lp(4.0 / 3.0));
        assert!(NormPlugin::euclidean().with_tile_type(1.5).is_err());
    }

    #[test]
    fn lq_norm_examples() {
        let e = NormPlugin::euclidean();
        let c = Signal::constant(3, 2, ValueKind::Vector, &[d("3"), d("4")]).unwrap();
        assert!((lq_norm(&c, 3.0, &e) - 5.0).abs() < 1e-12);
        assert_eq!(lq_norm_pow(&c, 2.0, &e), Num::Exact(d("25")));
        let f = Signal::scalar(1, vec![d("1"), d("-1")]).unwrap();
        assert_eq!(lq_norm(&f, 2.0, &e), 1.0);
        let mut z = Signal::<Dyadic>::zeros(3, 2, ValueKind::Vector);
        z.cell_mut(7).clone_from_slice(&[d("3"), d("4")]);
        assert_eq!(lq_norm(&z, f64::INFINITY, &e), 5.0);
    }

    #[test]
    fn maximal_examples() {
        let e = NormPlugin::euclidean();
        let c = Signal::constant(3, 1, ValueKind::Vector, &[d("-3/2")]).unwrap();
        assert!(maximal_function(&c, &e).data().iter().all(|&m| m == 1.5));
        let ind = LevelSet::from_indices(1, &[0]).unwrap();
        assert_eq!(maximal_indicator(&ind), vec![d("1"), d("1/2")]);
    }

    #[test]
    fn bmo_examples() {
        let e = NormPlugin::euclidean();
        let c = Signal::constant(4, 1, ValueKind::Vector, &[d("7")]).unwrap();
        assert_eq!(bmo_norm(&c, &e), 0.0);
        let h = Signal::scalar(1, vec![d("1"), d("-1")]).unwrap();
        assert_eq!(bmo_norm(&h, &e), 1.0);
    }

    #[test]
    fn level_set_measure() {
        let s = LevelSet::from_indices(3, &[0, 5, 6]).unwrap();
        assert_eq!(s.measure(), d("3/8"));
        assert_eq!(s.to_bitstring(), "10000110");
        assert!(LevelSet::from_indices(2, &[4]).is_err());
    }

    #[test]
    fn frequency_choice_range() {
        assert!(FrequencyChoice::new(2, vec![0, 1, 4, 3]).is_ok());
        assert!(FrequencyChoice::new(2, vec![0, 1, 5, 3]).is_err());
        assert!(FrequencyChoice::new(2, vec![0, 1]).is_err());
    }

    fn arb_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn holder_per_point(f in arb_vec(4), g in arb_vec(4), p in 1.1f64..8.0) {
            let pairing: f64 = f.iter().zip(&g).map(|(a, b)| a * b).sum();
            for plugin in [NormPlugin::lp(p).unwrap(), NormPlugin::schatten(p).unwrap(), NormPlugin::euclidean()] {
                let nf = plugin.value_norm(&f, ValueKind::Matrix, 2);
                let ng = plugin.dual().value_norm(&g, ValueKind::Matrix, 2);
                prop_assert!(pairing.abs() <= nf * ng * (1.0 + 1e-9) + 1e-12);
            }
        }

        #[test]
        fn frobenius_identity_exact(m in proptest::collection::vec(-1000i64..1000, 9)) {
            let a: Vec<Dyadic> = m.iter().map(|&x| Dyadic::from_small(x as i128, -7)).collect();
            let s2 = NormPlugin::schatten(2.0).unwrap();
            let e = NormPlugin::euclidean();
            prop_assert_eq!(
                s2.norm_pow(&a, ValueKind::Matrix, 3, 2.0),
                e.norm_pow(&a, ValueKind::Vector, 9, 2.0)
            );
            let float = s2.value_norm(&a, ValueKind::Matrix, 3);
            let exact = e.norm_pow(&a, ValueKind::Vector, 9, 2.0).to_f64().sqrt();
            prop_assert!((float - exact).abs() <= 1e-12 * (1.0 + exact));
        }

        #[test]
        fn maximal_dominates_mean(v in proptest::collection::vec(-50i64..50, 16)) {
            let f = Signal::scalar(4, v.iter().map(|&x| Dyadic::from_int(x)).collect()).unwrap();
            let e = NormPlugin::euclidean();
            let m = maximal_function(&f, &e);
            let mean = interval_average(&f, &DyadicInterval::UNIT)[0].to_f64().abs();
            prop_assert!(m.data().iter().all(|&x| x >= mean));
            let sup = lq_norm(&f, f64::INFINITY, &e);
            prop_assert!(bmo_norm(&f, &e) <= 2.0 * sup);
        }

        #[test]
        fn indicator_maximal_at_least_measure(bits in proptest::collection::vec(any::<bool>(), 32)) {
            let s = LevelSet::from_fn(5, |j| bits[j]);
            let m = maximal_indicator(&s);
            prop_assert!(m.iter().all(|x| *x >= s.measure()));
        }
    }
}
