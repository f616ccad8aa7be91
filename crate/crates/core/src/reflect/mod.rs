//! Sheafification by bounded forcing, and what is built on top of it:
//! certification against a battery of sheaves, subsheaf lattices, the `*`
//! operation, and the down-set criterion for quantales.

mod battery;
mod exactness;
mod lopos;
mod subobject;

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coverage::Coverage;
use crate::finset::{self, FinMap, FinSetObj, UnionFind};
use crate::moncat::ThinCat;
use crate::presheaf::{day_convolve, find_isomorphism, HomSearch, Presheaf, PresheafError, PresheafMorphism};
use crate::quantale::Quantale;
use crate::sheaf::{check_sheaf_equalizer, check_sheaf_orthogonal, cover_defects, SheafError};

pub use battery::{enumerate_presheaves, sheaf_battery};
pub use exactness::{non_lex_witness, pseudo_pullback_preserved, NonLexWitness, PseudoPullbackMeasurement};
pub use lopos::{lopos_check, DownSetAlgebra, LoposCertificate, LoposReport};
pub use subobject::{
    extremal_factorize, sheaf_closure, star, subsheaf_lattice, verify_epi, Factorization, SubobjectLattice,
};

/// Default bound on forcing rounds.
pub const DEFAULT_MAX_ITER: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReflectError {
    #[error("sheafification did not converge within {0} rounds")]
    NotConverged(usize),
    #[error("{0} is not a sheaf for the coverage")]
    NotASheaf(String),
    #[error("the given subsets are not a subsheaf: {0}")]
    NotASubsheaf(String),
    #[error("no extension along the unit exists")]
    NoExtension,
    #[error("multiplication is not associative: ({a}·{b})·{c} ≠ {a}·({b}·{c})")]
    MulNotAssociative { a: String, b: String, c: String },
    #[error("the order is not a complete lattice: {0}")]
    NotComplete(String),
    #[error("too large for exhaustive enumeration: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
}

/// Size of one forcing round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ForcingRound {
    /// Compatible families given a new gluing.
    pub existence: usize,
    /// Pairs of elements identified.
    pub uniqueness: usize,
}

/// The sheaf `a(P)`, the unit `η: P → a(P)`, and how it was reached.
#[derive(Debug, Clone)]
pub struct ReflectionResult {
    pub sheaf: Arc<Presheaf>,
    pub unit: PresheafMorphism,
    pub iterations: usize,
    pub converged: bool,
    pub rounds: Vec<ForcingRound>,
}

struct Existence {
    target: usize,
    anchors: Vec<(usize, usize)>,
}

/// Every gluing defect of `p`, in coverage order.
fn collect_events(p: &Presheaf, cov: &Coverage<ThinCat>) -> (Vec<Existence>, Vec<(usize, usize, usize)>) {
    let covers: Vec<_> = cov.all_families().collect();
    let defects: Vec<_> = covers.par_iter().map(|c| cover_defects(p, c)).collect();
    let mut seen = BTreeSet::new();
    let mut exist = Vec::new();
    let mut unique = BTreeSet::new();
    for (c, d) in covers.iter().zip(defects) {
        for fam in d.missing {
            let mut anchors: Vec<(usize, usize)> = c.legs.iter().map(|m| m.dom).zip(fam).collect();
            anchors.sort();
            anchors.dedup();
            if seen.insert((c.target, anchors.clone())) {
                exist.push(Existence {
                    target: c.target,
                    anchors,
                });
            }
        }
        for (_, xs) in d.multiple {
            for &x in &xs[1..] {
                unique.insert((c.target, xs[0], x));
            }
        }
    }
    (exist, unique.into_iter().collect())
}

/// Events whose target has no other event target strictly below it.
fn lowest_targets(q: &Quantale, exist: Vec<Existence>) -> Vec<Existence> {
    let targets: BTreeSet<usize> = exist.iter().map(|e| e.target).collect();
    exist
        .into_iter()
        .filter(|e| !targets.iter().any(|&t| q.lt(t, e.target)))
        .collect()
}

/// One round: push out along every failing sieve and coequalize every pair
/// of elements with equal restrictions, then close under restriction.
fn force(
    p: &Arc<Presheaf>,
    exist: &[Existence],
    unique: &[(usize, usize, usize)],
    round: usize,
) -> Result<(Arc<Presheaf>, PresheafMorphism), ReflectError> {
    let q = Arc::clone(p.site().quantale());
    let n = q.len();
    let ev_at: Vec<Vec<usize>> = (0..n)
        .map(|w| (0..exist.len()).filter(|&k| q.leq(w, exist[k].target)).collect())
        .collect();
    let taken: BTreeSet<&str> = p.sets().iter().flat_map(|s| s.iter()).collect();
    let fresh: Vec<String> = (0..exist.len())
        .map(|k| {
            let mut l = format!("~{round}.{k}");
            while taken.contains(l.as_str()) {
                l.push('\'');
            }
            l
        })
        .collect();
    let old: Vec<usize> = (0..n).map(|w| p.at(w).len()).collect();
    let local_len = |w: usize| old[w] + ev_at[w].len();
    let restrict_local = |v: usize, w: usize, a: usize| -> usize {
        if a < old[w] {
            p.restrict(v, w, a)
        } else {
            let k = ev_at[w][a - old[w]];
            old[v] + ev_at[v].binary_search(&k).expect("events reach every lower object")
        }
    };
    let mut uf: Vec<UnionFind> = (0..n).map(|w| UnionFind::new(local_len(w))).collect();
    for (k, e) in exist.iter().enumerate() {
        for &(ui, si) in &e.anchors {
            let star = old[ui] + ev_at[ui].binary_search(&k).expect("anchor below target");
            uf[ui].union(star, si);
        }
    }
    for &(u, x1, x2) in unique {
        uf[u].union(x1, x2);
    }
    let hasse = q.hasse_edges();
    for w in q.top_down() {
        let lower: Vec<usize> = hasse.iter().filter(|&&(_, u)| u == w).map(|&(v, _)| v).collect();
        for a in 0..local_len(w) {
            let r = uf[w].find(a);
            if r != a {
                for &v in &lower {
                    let (x, y) = (restrict_local(v, w, a), restrict_local(v, w, r));
                    uf[v].union(x, y);
                }
            }
        }
    }
    let mut at = Vec::with_capacity(n);
    let mut class: Vec<Vec<usize>> = Vec::with_capacity(n);
    for w in 0..n {
        let labels: Vec<String> = (0..local_len(w))
            .map(|a| {
                if a < old[w] {
                    p.at(w).label(a).to_string()
                } else {
                    fresh[ev_at[w][a - old[w]]].clone()
                }
            })
            .collect();
        let set = FinSetObj::from_generated(labels.clone());
        let pos: Vec<usize> = labels.iter().map(|l| set.index_of(l).expect("present")).collect();
        let pairs: Vec<(usize, usize)> = (0..local_len(w)).map(|a| (pos[a], pos[uf[w].find(a)])).collect();
        let (obj, proj) = finset::quotient(&set, pairs);
        class.push(pos.iter().map(|&k| proj.apply(k)).collect());
        at.push(obj);
    }
    let reps: Vec<Vec<usize>> = (0..n)
        .map(|w| {
            let mut r = vec![usize::MAX; at[w].len()];
            for (a, &c) in class[w].iter().enumerate().rev() {
                r[c] = a;
            }
            r
        })
        .collect();
    let next = Presheaf::from_fn(Arc::clone(p.site()), at, |v, w, c| {
        class[v][restrict_local(v, w, reps[w][c])]
    })?;
    let next = Arc::new(next);
    let comps = (0..n)
        .map(|w| FinMap::from_table(p.at(w).clone(), next.at(w).clone(), class[w][..old[w]].to_vec()))
        .collect();
    let eta = PresheafMorphism::new(Arc::clone(p), Arc::clone(&next), comps)?;
    Ok((next, eta))
}

/// Forces gluings into existence and identifies duplicate gluings until the
/// presheaf is a sheaf or `max_iter` rounds have run.
pub fn sheafify(p: &Presheaf, cov: &Coverage<ThinCat>, max_iter: usize) -> Result<ReflectionResult, ReflectError> {
    let start = Arc::new(p.clone().on_site(Arc::clone(cov.site()))?);
    let mut cur = Arc::clone(&start);
    let mut unit = PresheafMorphism::identity(Arc::clone(&start));
    let mut rounds = Vec::new();
    loop {
        let (exist, unique) = collect_events(&cur, cov);
        if exist.is_empty() && unique.is_empty() {
            return Ok(ReflectionResult {
                sheaf: cur,
                unit,
                iterations: rounds.len(),
                converged: true,
                rounds,
            });
        }
        if rounds.len() == max_iter {
            return Ok(ReflectionResult {
                sheaf: cur,
                unit,
                iterations: rounds.len(),
                converged: false,
                rounds,
            });
        }
        // merge first; force gluings only at the lowest failing objects
        let exist = if unique.is_empty() {
            lowest_targets(cur.quantale(), exist)
        } else {
            Vec::new()
        };
        let (next, eta) = force(&cur, &exist, &unique, rounds.len())?;
        rounds.push(ForcingRound {
            existence: exist.len(),
            uniqueness: unique.len(),
        });
        unit = eta.after(&unit)?;
        cur = next;
    }
}

/// Like [`sheafify`] but non-convergence is an error.
pub fn sheafify_strict(
    p: &Presheaf,
    cov: &Coverage<ThinCat>,
    max_iter: usize,
) -> Result<ReflectionResult, ReflectError> {
    let r = sheafify(p, cov, max_iter)?;
    if r.converged {
        Ok(r)
    } else {
        Err(ReflectError::NotConverged(max_iter))
    }
}

/// The unique `ψ: a(P) → G` with `ψ ∘ η = h`, when `G` is a sheaf.
pub fn extend_along_unit(r: &ReflectionResult, h: &PresheafMorphism) -> Result<PresheafMorphism, ReflectError> {
    let a = &r.sheaf;
    let g = h.dst();
    let mut fixed: Vec<Vec<Option<usize>>> = a.sets().iter().map(|s| vec![None; s.len()]).collect();
    for (u, row) in fixed.iter_mut().enumerate() {
        for x in 0..r.unit.src().at(u).len() {
            let (c, y) = (r.unit.apply(u, x), h.apply(u, x));
            match row[c] {
                Some(prev) if prev != y => return Err(ReflectError::NoExtension),
                _ => row[c] = Some(y),
            }
        }
    }
    let t = HomSearch::new(a, g)?
        .fixed(&fixed)
        .first()
        .ok_or(ReflectError::NoExtension)?;
    let comps = t
        .into_iter()
        .enumerate()
        .map(|(u, tab)| FinMap::from_indices(a.at(u).clone(), g.at(u).clone(), tab))
        .collect::<Result<_, _>>()
        .map_err(PresheafError::from)?;
    Ok(PresheafMorphism::new(Arc::clone(a), Arc::clone(g), comps)?)
}

/// `a(f): a(P) → a(Q)` for `f: P → Q`.
pub fn sheafify_morphism(
    f: &PresheafMorphism,
    rp: &ReflectionResult,
    rq: &ReflectionResult,
) -> Result<PresheafMorphism, ReflectError> {
    extend_along_unit(rp, &rq.unit.after(f)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BijectionCheck {
    pub sheaf: usize,
    pub homs_from_reflection: usize,
    pub homs_from_presheaf: usize,
    pub bijective: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificationReport {
    /// The reflection passes the orthogonality form of the sheaf condition.
    pub orthogonal: bool,
    pub battery_size: usize,
    pub checks: Vec<BijectionCheck>,
    pub passed: bool,
    pub note: String,
}

/// Checks that `a(P)` is a sheaf and that precomposition with `η` is a
/// bijection `Hom(a(P), G) → Hom(P, G)` for every `G` in the battery.
pub fn certify_reflection(
    r: &ReflectionResult,
    battery: &[Presheaf],
    cov: &Coverage<ThinCat>,
) -> Result<CertificationReport, ReflectError> {
    let orthogonal = check_sheaf_orthogonal(&r.sheaf, cov)?.is_sheaf();
    let src = r.unit.src();
    let checks: Vec<BijectionCheck> = battery
        .par_iter()
        .enumerate()
        .map(|(k, g)| -> Result<BijectionCheck, ReflectError> {
            let g = Arc::new(g.clone().on_site(Arc::clone(cov.site()))?);
            let from_a = HomSearch::new(&r.sheaf, &g)?.collect_tables();
            let from_p: BTreeSet<Vec<Vec<usize>>> = HomSearch::new(src, &g)?.collect_tables().into_iter().collect();
            let images: BTreeSet<Vec<Vec<usize>>> = from_a
                .iter()
                .map(|t| {
                    (0..src.len())
                        .map(|u| (0..src.at(u).len()).map(|x| t[u][r.unit.apply(u, x)]).collect())
                        .collect()
                })
                .collect();
            Ok(BijectionCheck {
                sheaf: k,
                homs_from_reflection: from_a.len(),
                homs_from_presheaf: from_p.len(),
                bijective: images.len() == from_a.len() && images == from_p,
            })
        })
        .collect::<Result<_, _>>()?;
    let passed = orthogonal && checks.iter().all(|c| c.bijective);
    Ok(CertificationReport {
        orthogonal,
        battery_size: battery.len(),
        note: format!(
            "universality certified against {} enumerated sheaves only",
            battery.len()
        ),
        checks,
        passed,
    })
}

/// `a(F ★ G)`.
pub fn sheaf_tensor(
    f: &Presheaf,
    g: &Presheaf,
    cov: &Coverage<ThinCat>,
    max_iter: usize,
) -> Result<ReflectionResult, ReflectError> {
    let day = day_convolve(f, g)?;
    sheafify_strict(&day.presheaf, cov, max_iter)
}

/// Whether the terminal presheaf is fixed by sheafification.
pub fn preserves_terminal(cov: &Coverage<ThinCat>) -> Result<bool, ReflectError> {
    let t = Arc::new(Presheaf::terminal(Arc::clone(cov.site())));
    let r = sheafify(&t, cov, DEFAULT_MAX_ITER)?;
    Ok(r.converged && find_isomorphism(&r.sheaf, &t).is_some())
}

/// Both sheaf checks agree that `f` is a sheaf.
pub fn passes_both_checks(f: &Presheaf, cov: &Coverage<ThinCat>) -> Result<bool, ReflectError> {
    Ok(check_sheaf_equalizer(f, cov)?.is_sheaf() && check_sheaf_orthogonal(f, cov)?.is_sheaf())
}
