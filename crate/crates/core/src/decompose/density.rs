use std::collections::BTreeSet;

use serde::Serialize;

use crate::certificate::{Backing, Certificate};
use crate::dyadic::{bitile_le, Bitile};
use crate::error::{Error, Result};
use crate::number::{Dyadic, Num};
use crate::signal::{FrequencyChoice, LevelSet};
use crate::timefreq::{DensityTable, Tree};

#[derive(Clone, Debug, Serialize)]
pub struct DensityDecomposition {
    /// The `δ ≥ density(coll)` the split was made against.
    pub bound: Num,
    pub sparse: Vec<Bitile>,
    pub trees: Vec<Tree>,
    pub certificates: Vec<Certificate>,
}

/// Splits `coll` into `sparse` with `density(sparse) ≤ 2^-q δ` and trees with
/// `Σ |I_T| ≤ 2^q δ^-1 |E|`, where `δ = bound` or `density(coll)`.
pub fn density_decompose(
    coll: &[Bitile],
    e: &LevelSet,
    nfun: &FrequencyChoice,
    q: f64,
    bound: Option<Num>,
) -> Result<DensityDecomposition> {
    let table = DensityTable::new(e, nfun)?;
    density_decompose_with(&table, nfun, e, coll, q, bound)
}

pub fn density_decompose_with(
    table: &DensityTable,
    nfun: &FrequencyChoice,
    e: &LevelSet,
    coll: &[Bitile],
    q: f64,
    bound: Option<Num>,
) -> Result<DensityDecomposition> {
    let dens = Num::Exact(table.density(coll));
    let delta = match bound {
        Some(b) if b.cmp_num(&dens).is_lt() => {
            return Err(Error::Precondition(format!(
                "density bound {b} is below density {dens}"
            )))
        }
        Some(b) => b,
        None => dens,
    };
    let threshold = delta.clone() * Num::pow2_real(-q);

    let mut sparse = Vec::new();
    let mut rest = Vec::new();
    let mut witnesses = BTreeSet::new();
    for p in coll {
        let (v, w) = table.ancestor_sup(p);
        match w {
            Some(w) if Num::Exact(v).gt(&threshold) => {
                rest.push(*p);
                witnesses.insert(w);
            }
            _ => sparse.push(*p),
        }
    }

    let witnesses: Vec<Bitile> = witnesses.into_iter().collect();
    let tops: Vec<Bitile> = witnesses
        .iter()
        .copied()
        .filter(|t| !witnesses.iter().any(|w| w != t && bitile_le(t, w)))
        .collect();

    let mut left: BTreeSet<Bitile> = rest.into_iter().collect();
    let mut trees = Vec::new();
    for t in &tops {
        let members: Vec<Bitile> = left.iter().copied().filter(|p| bitile_le(p, t)).collect();
        for p in &members {
            left.remove(p);
        }
        if !members.is_empty() {
            trees.push(Tree::new(*t, members)?);
        }
    }
    debug_assert!(left.is_empty(), "every dense bitile lies below a maximal witness");

    let mut certificates = Vec::new();
    let sparse_density = Num::Exact(table.density(&sparse));
    certificates.push(
        Certificate::new("density_sparse", sparse_density, threshold, Backing::Theorem).with("q", q),
    );
    let mass: Dyadic = trees.iter().map(|t| t.top_measure()).sum();
    certificates.push(
        Certificate::new(
            "density_mass",
            Num::Exact(mass) * delta.clone(),
            Num::pow2_real(q) * Num::Exact(e.measure()),
            Backing::Theorem,
        )
        .with("trees", trees.len()),
    );
    certificates.push(witness_disjointness(&tops, e, nfun));

    Ok(DensityDecomposition {
        bound: delta,
        sparse,
        trees,
        certificates,
    })
}

/// `Σ_T |I_T ∩ E_T| = |⋃_T I_T ∩ E_T|`, i.e. the sets are pairwise disjoint.
fn witness_disjointness(tops: &[Bitile], e: &LevelSet, nfun: &FrequencyChoice) -> Certificate {
    let l = e.levels();
    let mut hits = vec![0u32; 1 << l];
    for t in tops {
        for j in t.time.cells(l) {
            if e.contains(j) && t.freq().contains_point(nfun.at(j)) {
                hits[j] += 1;
            }
        }
    }
    let total: u64 = hits.iter().map(|&h| h as u64).sum();
    let union = hits.iter().filter(|&&h| h > 0).count() as u64;
    let scale = |c: u64| Num::Exact(Dyadic::from_int(c as i64).mul_pow2(-(l as i32)));
    Certificate::equality("density_witness_disjoint", scale(total), scale(union), Backing::Theorem)
        .with("tops", tops.len())
}
