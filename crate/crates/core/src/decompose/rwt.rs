use serde::Serialize;

use crate::certificate::{Backing, Certificate};
use crate::dyadic::{Bitile, DyadicInterval};
use crate::error::{Error, Result};
use crate::number::{Dyadic, Num, Scalar};
use crate::operators::carleson_direct;
use crate::signal::{dot, maximal_indicator, FrequencyChoice, LevelSet, NormPlugin, Signal};
use crate::timefreq::DualTable;
use crate::walsh::PacketTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `|E| ≤ |F|`.
    SmallE,
    /// `|E| > |F|`: `g` is restricted to the major subset `Ẽ`.
    LargeE,
}

#[derive(Clone, Debug, Serialize)]
pub struct RwtReport {
    pub p: f64,
    pub regime: Regime,
    pub measure_e: Dyadic,
    pub measure_f: Dyadic,
    /// `|G|` for `G = {M 1_F > 2|F|/|E|}`, large-`E` regime only.
    pub measure_g: Option<Dyadic>,
    /// `|Ẽ|`, large-`E` regime only.
    pub measure_major: Option<Dyadic>,
    /// `⟨Cf, g⟩` from the bitile form.
    pub pairing: Num,
    /// `⟨Cf, g⟩` from the partial sums.
    pub pairing_direct: Num,
    /// `|E|(1 + log(|F|/|E|))` or `|F|(1 + log(|E|/|F|))`.
    pub log_bound: f64,
    pub log_ratio: f64,
    /// `|F|^{1/p} |E|^{1/p'}`.
    pub power_bound: f64,
    pub power_ratio: f64,
    pub certificates: Vec<Certificate>,
}

fn check_support<T: Scalar>(name: &str, f: &Signal<T>, set: &LevelSet, plugin: &NormPlugin) -> Result<()> {
    for j in 0..f.n_cells() {
        let v = f.cell(j);
        if !set.contains(j) && v.iter().any(|x| !x.is_zero()) {
            return Err(Error::Precondition(format!("{name} is nonzero at cell {j} outside its set")));
        }
        if plugin.value_norm(v, f.kind(), f.dim()) > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!("{name} has pointwise norm above 1 at cell {j}")));
        }
    }
    Ok(())
}

/// `⟨Cf, g⟩` for `f` supported on `F` and `g` on `E`, both pointwise bounded
/// by 1, compared with the restricted weak-type bounds.
pub fn restricted_weak_type<T: Scalar>(
    fset: &LevelSet,
    e: &LevelSet,
    f: &Signal<T>,
    g: &Signal<T>,
    nfun: &FrequencyChoice,
    p: f64,
    plugin: &NormPlugin,
) -> Result<RwtReport> {
    if e.is_empty() || fset.is_empty() {
        return Err(Error::Precondition("restricted weak type needs |E|, |F| > 0".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidNorm(format!("exponent p = {p} must lie in (1, ∞)")));
    }
    f.ensure_same_shape(g)?;
    let l = f.levels();
    for (what, found) in [("set F", fset.levels()), ("set E", e.levels()), ("frequency choice", nfun.levels())] {
        if found != l {
            return Err(Error::ResolutionMismatch { what, expected: l, found });
        }
    }
    check_support("f", f, fset, plugin)?;
    check_support("g", g, e, &plugin.dual())?;

    let (me, mf) = (e.measure(), fset.measure());
    let mut certificates = Vec::new();
    let (regime, working, measure_g, measure_major, g_set) = if me > mf {
        // G = {M 1_F > 2|F|/|E|} via M 1_F · |E| > 2|F|
        let m = maximal_indicator(fset);
        let two_f = mf.mul_pow2(1);
        let big = LevelSet::from_fn(l, |j| &m[j] * &me > two_f);
        let major = e.difference(&big);
        certificates.push(
            Certificate::new("major_subset", Num::Exact(me.mul_pow2(-1)), Num::Exact(major.measure()), Backing::Theorem)
                .with("G", big.measure()),
        );
        (Regime::LargeE, g.restrict(&major)?, Some(big.measure()), Some(major.measure()), Some(big))
    } else {
        (Regime::SmallE, g.clone(), None, None, None)
    };

    let table = PacketTable::new(f);
    let dual = DualTable::new(&working, e, nfun)?;
    let mut pairing = T::zero();
    let mut vanishing = T::zero();
    let mut terms: Vec<(Bitile, T)> = Vec::new();
    for k in 0..=l {
        for pos in 0..1u64 << k {
            let time = DyadicInterval::new(k, pos);
            let slots = if k < l { (1u64 << (l - k - 1)) + 1 } else { 1 };
            for m in 0..slots {
                let b = Bitile { time, m };
                let (Some(cf), Some(cg)) = (table.coefficient(&b.down()), dual.get(&b)) else { continue };
                terms.push((b, dot(cf, cg).mul_pow2(k as i32)));
            }
        }
    }
    for (b, t) in &terms {
        pairing += t.clone();
        if let Some(big) = &g_set {
            if big.count_in(&b.time) == b.time.cells(l).len() {
                vanishing += t.abs_val();
            }
        }
    }
    let direct = carleson_direct(f, nfun)?;
    let mut pd = T::zero();
    for j in 0..f.n_cells() {
        pd += dot(direct.cell(j), working.cell(j));
    }
    let pairing_direct = pd.mul_pow2(-(l as i32)).to_num();
    let pairing = pairing.to_num();
    certificates.push(Certificate::equality("rwt_bitile_pairing", pairing.clone(), pairing_direct.clone(), Backing::Theorem));
    if g_set.is_some() {
        certificates.push(Certificate::equality("rwt_vanishing", vanishing.to_num(), Num::zero(), Backing::Theorem));
    }

    let (fe, ff) = (me.to_f64(), mf.to_f64());
    let log_bound = match regime {
        Regime::SmallE => fe * (1.0 + (ff / fe).ln()),
        Regime::LargeE => ff * (1.0 + (fe / ff).ln()),
    };
    let power_bound = ff.powf(1.0 / p) * fe.powf(1.0 - 1.0 / p);
    let abs = pairing.to_f64().abs();
    Ok(RwtReport {
        p,
        regime,
        measure_e: me,
        measure_f: mf,
        measure_g,
        measure_major,
        pairing,
        pairing_direct,
        log_bound,
        log_ratio: abs / log_bound,
        power_bound,
        power_ratio: abs / power_bound,
        certificates,
    })
}
