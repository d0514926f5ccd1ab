use serde::Serialize;

use crate::certificate::{Backing, Certificate};
use crate::dyadic::{Bitile, DyadicInterval};
use crate::error::{Error, Result};
use crate::number::{Num, Scalar};
use crate::signal::{bmo_norm, lq_norm_pow, NormPlugin, Signal};
use crate::timefreq::{down_tile_overlap, epsilon_pt, SizeEngine, Tree};

#[derive(Clone, Debug, Serialize)]
pub struct TreeTileType {
    pub top: Bitile,
    pub members: usize,
    /// `‖Σ_P ⟨f,w_{P_d}⟩ w_{P_d}‖_q^q`.
    pub packet_pow: Num,
    /// `‖Σ_P ⟨f,w_{P_d}⟩ h_{I_P}‖_q^q`.
    pub haar_pow: Num,
    /// `‖Σ_P ε_PT ⟨f,w_{P_d}⟩ h_{I_P}‖_q^q`.
    pub haar_signed_pow: Num,
    /// `‖Σ_P ⟨f,w_{P_d}⟩ h_{I_P}‖_BMO`.
    pub haar_bmo: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TileTypeReport {
    pub q: f64,
    /// `(Σ_T ‖W_T f‖_q^q)^{1/q} / ‖f‖_q`.
    pub ratio: f64,
    pub packet_pow: Num,
    pub haar_pow: Num,
    pub norm_f_pow: Num,
    /// `max_T ‖W'_T f‖_BMO / ‖f‖_∞`.
    pub bmo_ratio: f64,
    pub trees: Vec<TreeTileType>,
    pub certificates: Vec<Certificate>,
}

/// Checks that `family` consists of up-trees with pairwise disjoint
/// down-tiles across all `(P, 𝐓)` pairs.
pub fn check_family(family: &[Tree], levels: u32) -> Result<()> {
    let mut pairs = Vec::new();
    for (i, t) in family.iter().enumerate() {
        if !t.is_up_tree() {
            return Err(Error::Precondition(format!("tree with top {:?} is not an up-tree", t.top)));
        }
        for p in &t.members {
            if p.k() > levels || !p.time.in_unit() {
                return Err(Error::TileOutOfGrid {
                    tile: p.down(),
                    levels,
                });
            }
            pairs.push((*p, i));
        }
    }
    match down_tile_overlap(&pairs) {
        Some((a, b)) => Err(Error::DisjointnessViolation(a, b)),
        None => Ok(()),
    }
}

/// The ratio `(Σ_T ‖Σ_{P∈T} ⟨f,w_{P_d}⟩w_{P_d}‖_q^q)^{1/q} / ‖f‖_q` for a
/// family with disjoint down-tiles, together with the Haar-side norms.
pub fn tile_type_constant<T: Scalar>(
    family: &[Tree],
    f: &Signal<T>,
    q: f64,
    plugin: &NormPlugin,
) -> Result<TileTypeReport> {
    let l = f.levels();
    check_family(family, l)?;
    let engine = SizeEngine::new(f, q, plugin)?;
    let norm_f_pow = lq_norm_pow(f, q, plugin);
    let hilbert = plugin.is_hilbert() && q == 2.0;
    let sup_f = (0..f.n_cells())
        .map(|j| plugin.value_norm(f.cell(j), f.kind(), f.dim()))
        .fold(0.0, f64::max);

    let mut trees = Vec::new();
    let mut certificates = Vec::new();
    for tree in family {
        let buf = engine.packet_sum(&tree.members, &DyadicInterval::UNIT);
        let packet_pow = grid_norm_pow(&engine, &buf, l);
        let r = if tree.members.iter().any(|p| p.k() == l) { l + 1 } else { l };
        let (haar, haar_signed) = haar_sums(&engine, tree, r)?;
        let haar_pow = grid_norm_pow(&engine, &haar, r);
        let haar_signed_pow = grid_norm_pow(&engine, &haar_signed, r);
        let haar_signal = Signal::new(r, f.dim(), f.kind(), haar)?;
        let haar_bmo = bmo_norm(&haar_signal, plugin);
        certificates.push(
            Certificate::equality("tile_type_signed_haar", packet_pow.clone(), haar_signed_pow.clone(), Backing::Theorem)
                .with("top", tree.top),
        );
        certificates.push(
            Certificate::equality(
                "tile_type_haar",
                packet_pow.clone(),
                haar_pow.clone(),
                if hilbert { Backing::Theorem } else { Backing::Empirical },
            )
            .with("top", tree.top),
        );
        trees.push(TreeTileType {
            top: tree.top,
            members: tree.len(),
            packet_pow,
            haar_pow,
            haar_signed_pow,
            haar_bmo,
        });
    }
    let packet_pow: Num = trees.iter().map(|t| t.packet_pow.clone()).sum();
    let haar_pow: Num = trees.iter().map(|t| t.haar_pow.clone()).sum();
    certificates.push(Certificate::new(
        "tile_type",
        packet_pow.clone(),
        norm_f_pow.clone(),
        if hilbert { Backing::Theorem } else { Backing::Empirical },
    ));
    let ratio = if packet_pow.is_zero() {
        0.0
    } else {
        (packet_pow.to_f64() / norm_f_pow.to_f64()).powf(1.0 / q)
    };
    let bmo_max = trees.iter().map(|t| t.haar_bmo).fold(0.0, f64::max);
    let bmo_ratio = if bmo_max == 0.0 { 0.0 } else { bmo_max / sup_f };
    Ok(TileTypeReport {
        q,
        ratio,
        packet_pow,
        haar_pow,
        norm_f_pow,
        bmo_ratio,
        trees,
        certificates,
    })
}

/// `∫ ‖v‖^q` for a buffer on the `2^r` grid.
fn grid_norm_pow<T: Scalar>(engine: &SizeEngine<T>, buf: &[T], r: u32) -> Num {
    let w = engine.table().width();
    let plugin = engine.plugin();
    let sig_kind = engine.kind();
    let sum: Num = buf
        .chunks(w)
        .map(|v| plugin.norm_pow(v, sig_kind, engine.dim(), engine.q()))
        .sum();
    crate::signal::scale_num(sum, -(r as i32))
}

/// `Σ_P ⟨f,w_{P_d}⟩ h_{I_P}` and `Σ_P ε_PT ⟨f,w_{P_d}⟩ h_{I_P}` on the `2^r` grid.
fn haar_sums<T: Scalar>(engine: &SizeEngine<T>, tree: &Tree, r: u32) -> Result<(Vec<T>, Vec<T>)> {
    let w = engine.table().width();
    let mut plain = vec![T::zero(); w << r];
    let mut signed = vec![T::zero(); w << r];
    for p in &tree.members {
        let Some(c) = engine.coefficient(p) else { continue };
        let eps = epsilon_pt(p, &tree.top)?;
        let scaled: Vec<T> = c.iter().map(|x| x.mul_pow2(p.k() as i32)).collect();
        let cells = p.time.cells(r);
        let mid = cells.start + cells.len() / 2;
        for j in cells {
            let s = if j < mid { 1 } else { -1 };
            for (i, v) in scaled.iter().enumerate() {
                let (a, b) = (&mut plain[j * w + i], &mut signed[j * w + i]);
                if s == 1 {
                    *a += v.clone();
                } else {
                    *a -= v.clone();
                }
                if s * eps == 1 {
                    *b += v.clone();
                } else {
                    *b -= v.clone();
                }
            }
        }
    }
    Ok((plain, signed))
}
