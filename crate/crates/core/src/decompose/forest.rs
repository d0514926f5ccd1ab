use std::collections::BTreeMap;

use serde::Serialize;

use crate::certificate::{Backing, Certificate};
use crate::dyadic::{Bitile, BitileUniverse};
use crate::error::{Error, Result};
use crate::number::{Dyadic, Num, Scalar};
use crate::signal::{lq_norm_pow, FrequencyChoice, LevelSet, NormPlugin, Signal};
use crate::timefreq::{form_term, tree_form_sum, DensityTable, DualTable, SizeEngine, Tree, TreeFormReport};

use super::density::density_decompose_with;
use super::size::size_decompose_with;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Density,
    Size,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelTree {
    pub origin: Origin,
    #[serde(flatten)]
    pub tree: Tree,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForestLevel {
    pub n: i64,
    /// `min(1, 2^{nq} |E|)`.
    pub density_bound: Num,
    /// `(2^n ‖f‖_q)^q`.
    pub size_bound_pow: Num,
    pub trees: Vec<LevelTree>,
    pub certificates: Vec<Certificate>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeveledForest {
    pub q: f64,
    pub measure_e: Dyadic,
    pub norm_f_pow: Num,
    /// Only levels at which some tree was extracted.
    pub levels: Vec<ForestLevel>,
    /// Bitiles never extracted; all have a zero coefficient.
    pub residual: Vec<Bitile>,
}

impl LeveledForest {
    pub fn trees(&self) -> impl Iterator<Item = (i64, &LevelTree)> {
        self.levels.iter().flat_map(|l| l.trees.iter().map(move |t| (l.n, t)))
    }

    pub fn certificates(&self) -> impl Iterator<Item = &Certificate> {
        self.levels.iter().flat_map(|l| l.certificates.iter())
    }
}

struct Levels {
    q: f64,
    measure_e: Num,
    norm_f_pow: Num,
}

impl Levels {
    fn delta(&self, n: i64) -> Num {
        let v = Num::pow2_real(n as f64 * self.q) * self.measure_e.clone();
        let one = Num::pow2(0);
        if v.gt(&one) {
            one
        } else {
            v
        }
    }

    fn sigma_pow(&self, n: i64) -> Num {
        Num::pow2_real(n as f64 * self.q) * self.norm_f_pow.clone()
    }
}

/// Largest `n ≤ hi` with `pred(n)` for a predicate that holds on a half-line
/// `(-∞, n*]`, starting the search at `guess`.
fn largest_with(hi: i64, guess: f64, pred: impl Fn(i64) -> bool) -> i64 {
    let mut n = if guess.is_finite() { (guess.floor() as i64).min(hi) } else { hi.min(0) };
    while !pred(n) {
        n -= 1;
    }
    while n < hi && pred(n + 1) {
        n += 1;
    }
    n
}

/// The leveled forest: at level `n` the remaining collection has
/// `density ≤ min(1, 2^{nq}|E|)` and `size ≤ 2^n ‖f‖_q`; the density step and
/// then the size step extract trees and pass on a collection satisfying the
/// tags of level `n − 1`.
pub fn full_decompose<T: Scalar>(
    coll: &[Bitile],
    f: &Signal<T>,
    e: &LevelSet,
    nfun: &FrequencyChoice,
    q: f64,
    plugin: &NormPlugin,
) -> Result<LeveledForest> {
    let engine = SizeEngine::new(f, q, plugin)?;
    let table = DensityTable::new(e, nfun)?;
    full_decompose_with(&engine, &table, e, nfun, coll, &lq_norm_pow(f, q, plugin))
}

pub fn full_decompose_with<T: Scalar>(
    engine: &SizeEngine<T>,
    table: &DensityTable,
    e: &LevelSet,
    nfun: &FrequencyChoice,
    coll: &[Bitile],
    norm_f_pow: &Num,
) -> Result<LeveledForest> {
    if e.is_empty() {
        return Err(Error::Precondition("full decomposition needs |E| > 0".into()));
    }
    if norm_f_pow.is_zero() {
        return Err(Error::Precondition("full decomposition needs ‖f‖_q > 0".into()));
    }
    let q = engine.q();
    let lv = Levels {
        q,
        measure_e: Num::Exact(e.measure()),
        norm_f_pow: norm_f_pow.clone(),
    };
    let log_e = e.measure().to_f64().log2();
    let log_f = norm_f_pow.to_f64().log2();
    let quarter = Num::pow2_real(-q);

    let mut rem: Vec<Bitile> = coll.to_vec();
    rem.sort();
    rem.dedup();
    let mut levels = Vec::new();
    let mut hi: Option<i64> = None;
    for _ in 0..=coll.len() {
        if rem.iter().all(|p| engine.is_zero(p)) {
            break;
        }
        let dens = Num::Exact(table.density(&rem));
        let size_pow = engine.size(&rem).value_pow;
        let log_d = dens.to_f64().log2();
        let log_s = size_pow.to_f64().log2();
        let hi_n = match hi {
            Some(h) => h,
            None => {
                // smallest n at which both tags hold
                let guess = ((log_d - log_e) / q).max((log_s - log_f) / q).ceil();
                let fails = |n: i64| !(dens.le(&lv.delta(n)) && size_pow.le(&lv.sigma_pow(n)));
                largest_with(i64::MAX / 4, guess - 1.0, fails) + 1
            }
        };
        // largest level at or below hi_n where one of the steps extracts a tree
        let guess = (1.0 + (log_d - log_e) / q).max(1.0 + (log_s - log_f) / q);
        let productive = |n: i64| {
            dens.gt(&(lv.delta(n) * quarter.clone())) || size_pow.gt(&(lv.sigma_pow(n) * quarter.clone()))
        };
        let n = largest_with(hi_n, guess, productive);
        let (delta, sigma_pow) = (lv.delta(n), lv.sigma_pow(n));

        let mut certificates = vec![
            Certificate::new("level_density", dens, delta.clone(), Backing::Theorem).with("n", n),
            Certificate::new("level_size", size_pow, sigma_pow.clone(), Backing::Theorem).with("n", n),
        ];
        let dd = density_decompose_with(table, nfun, e, &rem, q, Some(delta.clone()))?;
        let sd = size_decompose_with(engine, &dd.sparse, Some(sigma_pow.clone()), norm_f_pow)?;
        let mut trees: Vec<LevelTree> = dd
            .trees
            .into_iter()
            .map(|tree| LevelTree {
                origin: Origin::Density,
                tree,
            })
            .collect();
        trees.extend(sd.trees.into_iter().map(|tree| LevelTree {
            origin: Origin::Size,
            tree,
        }));
        for c in dd.certificates.into_iter().chain(sd.certificates) {
            certificates.push(c.with("n", n));
        }
        // Σ|I_T| ≤ 2^q (|E| δ_n^-1 + ‖f‖^q σ_n^-q) = 2^q (max(|E|, 2^{-nq}) + 2^{-nq})
        let mass: Dyadic = trees.iter().map(|t| t.tree.top_measure()).sum();
        let pow = Num::pow2_real(-(n as f64) * q);
        let e_over = if lv.measure_e.gt(&pow) { lv.measure_e.clone() } else { pow.clone() };
        let backing = if engine.plugin().is_hilbert() && q == 2.0 {
            Backing::Theorem
        } else {
            Backing::Empirical
        };
        let rhs = Num::pow2_real(q) * (e_over + pow.clone());
        let lhs = Num::Exact(mass);
        let mut mass_cert = Certificate::new("level_mass", lhs.clone(), rhs, backing).with("n", n);
        mass_cert.set("C", crate::certificate::ratio(&lhs, &pow));
        certificates.push(mass_cert);

        let removed: usize = trees.iter().map(|t| t.tree.len()).sum();
        if removed == 0 {
            return Err(Error::Precondition(format!("level {n} extracted no tree")));
        }
        rem = sd.small;
        levels.push(ForestLevel {
            n,
            density_bound: delta,
            size_bound_pow: sigma_pow,
            trees,
            certificates,
        });
        hi = Some(n - 1);
    }
    if rem.iter().any(|p| !engine.is_zero(p)) {
        return Err(Error::Precondition("leveled decomposition did not terminate".into()));
    }
    Ok(LeveledForest {
        q,
        measure_e: e.measure(),
        norm_f_pow: norm_f_pow.clone(),
        levels,
        residual: rem,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeContribution {
    pub n: i64,
    pub origin: Origin,
    pub top: Bitile,
    pub members: usize,
    pub form: Num,
    pub tree_lemma: TreeFormReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct CarlesonFormReport {
    pub q: f64,
    /// `Σ_P |⟨f,w_{P_d}⟩⟨w_{P_d}, g 1_{E_{P_u}}⟩|` over the universe.
    pub form: Num,
    /// `|E|^{1/q'} ‖f‖_q`.
    pub bound: f64,
    pub ratio: f64,
    /// `Σ_n Σ_j min(1, 2^{nq}|E|) · 2^n ‖f‖_q · |I_{T_{n,j}}|`.
    pub level_sum: f64,
    pub level_ratio: f64,
    pub max_tree_ratio: f64,
    pub per_level: BTreeMap<i64, Num>,
    pub trees: Vec<TreeContribution>,
    pub forest: LeveledForest,
    pub certificates: Vec<Certificate>,
}

/// Decomposes the whole bitile universe and compares the form against
/// `|E|^{1/q'} ‖f‖_q`, tree by tree and level by level.
pub fn carleson_form_certificate<T: Scalar>(
    f: &Signal<T>,
    g: &Signal<T>,
    e: &LevelSet,
    nfun: &FrequencyChoice,
    q: f64,
    plugin: &NormPlugin,
) -> Result<CarlesonFormReport> {
    f.ensure_same_shape(g)?;
    let dual = plugin.dual();
    if (0..g.n_cells()).any(|j| dual.value_norm(g.cell(j), g.kind(), g.dim()) > 1.0 + 1e-12) {
        log::warn!("g exceeds pointwise dual norm 1");
    }
    let universe = BitileUniverse::new(f.levels())?;
    let engine = SizeEngine::new(f, q, plugin)?;
    let table = DensityTable::new(e, nfun)?;
    let dual_table = DualTable::new(g, e, nfun)?;
    let norm_f_pow = lq_norm_pow(f, q, plugin);
    let forest = full_decompose_with(&engine, &table, e, nfun, universe.items(), &norm_f_pow)?;

    let term = |p: &Bitile| form_term(&engine, &dual_table, p).abs_val().to_num();
    let mut trees = Vec::new();
    let mut per_level: BTreeMap<i64, Num> = BTreeMap::new();
    let mut level_sum = 0.0;
    let norm_f = norm_f_pow.root(q);
    for level in &forest.levels {
        for lt in &level.trees {
            let form: Num = lt.tree.members.iter().map(term).sum();
            let acc = per_level.entry(level.n).or_insert_with(Num::zero);
            *acc = acc.clone() + form.clone();
            level_sum += level.density_bound.to_f64()
                * (level.n as f64).exp2()
                * norm_f
                * lt.tree.top_measure().to_f64();
            trees.push(TreeContribution {
                n: level.n,
                origin: lt.origin,
                top: lt.tree.top,
                members: lt.tree.len(),
                form,
                tree_lemma: tree_form_sum(&lt.tree, &engine, &dual_table, &table, e, nfun),
            });
        }
    }
    let form: Num = trees.iter().map(|t| t.form.clone()).sum();
    let residual: Num = forest.residual.iter().map(term).sum();
    let direct: Num = universe.items().iter().map(term).sum();
    let bound = e.measure().to_f64().powf(1.0 - 1.0 / q) * norm_f;
    let mut certificates: Vec<Certificate> = forest.certificates().cloned().collect();
    certificates.push(Certificate::equality("form_partition", form.clone(), direct, Backing::Theorem));
    certificates.push(Certificate::equality("form_residual", residual, Num::zero(), Backing::Theorem));
    for t in &trees {
        certificates.extend(t.tree_lemma.certificates.iter().cloned());
    }
    let max_tree_ratio = trees.iter().map(|t| t.tree_lemma.ratio).fold(0.0, f64::max);
    let ratio = if form.is_zero() { 0.0 } else { form.to_f64() / bound };
    let level_ratio = if form.is_zero() { 0.0 } else { form.to_f64() / level_sum };
    Ok(CarlesonFormReport {
        q,
        form,
        bound,
        ratio,
        level_sum,
        level_ratio,
        max_tree_ratio,
        per_level,
        trees,
        forest,
        certificates,
    })
}
