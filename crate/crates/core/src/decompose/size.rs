use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::Serialize;

use crate::certificate::{Backing, Certificate};
use crate::dyadic::{bitile_le, Bitile};
use crate::error::{Error, Result};
use crate::exec;
use crate::number::{Dyadic, Num, Scalar};
use crate::signal::{lq_norm_pow, NormPlugin, Signal};
use crate::timefreq::{down_tile_overlap, SizeEngine, Tree};

#[derive(Clone, Debug, Serialize)]
pub struct SizeDecomposition {
    /// `σ^q` for the `σ ≥ size(coll)` the split was made against.
    pub bound_pow: Num,
    pub small: Vec<Bitile>,
    /// In extraction order.
    pub trees: Vec<Tree>,
    pub certificates: Vec<Certificate>,
}

impl SizeDecomposition {
    /// `Σ_j |I_{T_j}|`.
    pub fn mass(&self) -> Dyadic {
        self.trees.iter().map(|t| t.top_measure()).sum()
    }
}

pub fn size_decompose<T: Scalar>(
    coll: &[Bitile],
    f: &Signal<T>,
    q: f64,
    plugin: &NormPlugin,
) -> Result<SizeDecomposition> {
    let engine = SizeEngine::new(f, q, plugin)?;
    size_decompose_with(&engine, coll, None, &lq_norm_pow(f, q, plugin))
}

/// Greedy extraction of complete trees `{P ≤ T}` while some complete up-tree
/// has `Δ > σ/2`, choosing among maximal such tops the one whose `ω_T` has
/// the smallest center (ties: canonical order).
pub fn size_decompose_with<T: Scalar>(
    engine: &SizeEngine<T>,
    coll: &[Bitile],
    bound_pow: Option<Num>,
    norm_f_pow: &Num,
) -> Result<SizeDecomposition> {
    let q = engine.q();
    let (mut small, live): (Vec<Bitile>, Vec<Bitile>) = coll.iter().partition(|p| engine.is_zero(p));
    let size_pow = engine.size(&live).value_pow;
    let sigma_pow = match bound_pow {
        Some(b) if b.cmp_num(&size_pow).is_lt() => {
            return Err(Error::Precondition(format!("size bound {b} is below size^q {size_pow}")))
        }
        Some(b) => b,
        None => size_pow,
    };
    let threshold = sigma_pow.clone() * Num::pow2_real(-q);

    let mut left: BTreeSet<Bitile> = live.iter().copied().collect();
    let mut cands: BTreeMap<Bitile, (Vec<Bitile>, Num)> = BTreeMap::new();
    let mut dirty: Vec<Bitile> = Vec::new();
    for (t, members) in engine.up_trees(&live) {
        cands.insert(t, (members, Num::zero()));
        dirty.push(t);
    }
    let mut trees = Vec::new();
    let mut pairs: Vec<(Bitile, usize)> = Vec::new();
    for _round in 0..=coll.len() {
        refresh(engine, &mut cands, &dirty);
        let qualifying: HashSet<Bitile> = cands
            .iter()
            .filter(|(_, (_, d))| d.gt(&threshold))
            .map(|(t, _)| *t)
            .collect();
        let Some(top) = choose_top(&qualifying) else { break };
        let members: Vec<Bitile> = left.iter().copied().filter(|p| bitile_le(p, &top)).collect();
        let tree = Tree::new(top, members)?;
        for p in &tree.members {
            left.remove(p);
        }
        let removed: HashSet<Bitile> = tree.members.iter().copied().collect();
        let mut touched = BTreeSet::new();
        for p in &tree.members {
            for t in p.up_tops() {
                if cands.contains_key(&t) {
                    touched.insert(t);
                }
            }
        }
        dirty.clear();
        for t in touched {
            let entry = cands.get_mut(&t).expect("touched tops are candidates");
            entry.0.retain(|p| !removed.contains(p));
            if entry.0.is_empty() {
                cands.remove(&t);
            } else {
                dirty.push(t);
            }
        }
        let idx = trees.len();
        pairs.extend(tree.up_part().into_iter().map(|p| (p, idx)));
        trees.push(tree);
    }
    if cands.values().any(|(_, d)| d.gt(&threshold)) {
        return Err(Error::Precondition("size decomposition did not terminate".into()));
    }
    small.extend(left);
    small.sort();

    let theorem = if engine.plugin().is_hilbert() && q == 2.0 {
        Backing::Theorem
    } else {
        Backing::Empirical
    };
    let mut certificates = Vec::new();
    certificates.push(Certificate::new(
        "size_small",
        engine.size(&small).value_pow,
        threshold,
        Backing::Theorem,
    ));
    let overlap = down_tile_overlap(&pairs);
    let mut disjoint = Certificate::new(
        "size_down_disjoint",
        Num::Exact(Dyadic::from_int(overlap.is_some() as i64)),
        Num::zero(),
        theorem,
    )
    .with("pairs", pairs.len());
    if let Some((a, b)) = overlap {
        disjoint.set("overlap", [a, b]);
    }
    certificates.push(disjoint);
    let mass: Dyadic = trees.iter().map(|t| t.top_measure()).sum();
    let lhs = Num::Exact(mass) * sigma_pow.clone();
    let mut mass_cert = Certificate::new(
        "size_mass",
        lhs.clone(),
        Num::pow2_real(q) * norm_f_pow.clone(),
        theorem,
    );
    mass_cert.set("C", crate::certificate::ratio(&lhs, norm_f_pow));
    certificates.push(mass_cert);

    Ok(SizeDecomposition {
        bound_pow: sigma_pow,
        small,
        trees,
        certificates,
    })
}

fn refresh<T: Scalar>(engine: &SizeEngine<T>, cands: &mut BTreeMap<Bitile, (Vec<Bitile>, Num)>, dirty: &[Bitile]) {
    let values = exec::map_slice(dirty, |t| engine.delta_pow(t, &cands[t].0));
    for (t, v) in dirty.iter().zip(values) {
        cands.get_mut(t).expect("dirty tops are candidates").1 = v;
    }
}

/// The maximal qualifying top with the smallest center of `ω_T`, ties to
/// the canonically smallest.
fn choose_top(qualifying: &HashSet<Bitile>) -> Option<Bitile> {
    let mut order: Vec<Bitile> = qualifying.iter().copied().collect();
    order.sort_by_key(|t| (t.double_center(), *t));
    order.into_iter().find(|t| {
        !t.ancestors()
            .any(|a| a != *t && qualifying.contains(&a))
    })
}
