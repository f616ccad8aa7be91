//! How far sheafification is from preserving finite limits.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;

use crate::coverage::Coverage;
use crate::moncat::ThinCat;
use crate::presheaf::{
    day_convolve, day_projections, equalizer, isomorphic, psh_pseudo_pullback, HomSearch, Presheaf, PresheafMorphism,
    PresheafSpec,
};

use super::{
    enumerate_presheaves, extend_along_unit, sheafify_morphism, sheafify_strict, ReflectError, ReflectionResult,
};

/// A parallel pair whose equalizer is not preserved: `a(Eq(f, g))` and
/// `Eq(a f, a g)` differ.
#[derive(Debug, Clone, Serialize)]
pub struct NonLexWitness {
    pub source: PresheafSpec,
    pub target: PresheafSpec,
    pub left: Vec<Vec<usize>>,
    pub right: Vec<Vec<usize>>,
    /// Total size of the sheafified equalizer.
    pub sheafified_equalizer: usize,
    /// Total size of the equalizer of the sheafified pair.
    pub equalizer_of_sheafified: usize,
}

fn tables_to_morphism(src: &Arc<Presheaf>, dst: &Arc<Presheaf>, t: Vec<Vec<usize>>) -> PresheafMorphism {
    PresheafMorphism::from_tables(Arc::clone(src), Arc::clone(dst), t)
}

/// Searches parallel pairs out of representables into presheaves with
/// values of size at most `bound` for one whose equalizer sheafification
/// does not preserve.
pub fn non_lex_witness(
    cov: &Coverage<ThinCat>,
    bound: usize,
    max_iter: usize,
) -> Result<Option<NonLexWitness>, ReflectError> {
    let site = cov.site();
    let n = site.quantale().len();
    let mut targets = enumerate_presheaves(site, bound, &|_, _| true)?;
    targets.sort_by_key(|p| p.size());
    for u in site.quantale().top_down() {
        let p = Arc::new(Presheaf::yoneda(Arc::clone(site), u));
        let rp = sheafify_strict(&p, cov, max_iter)?;
        for q in &targets {
            let q = Arc::new(q.clone());
            let homs = HomSearch::new(&p, &q)?.collect_tables();
            if homs.len() < 2 {
                continue;
            }
            let rq = sheafify_strict(&q, cov, max_iter)?;
            for i in 0..homs.len() {
                for j in i + 1..homs.len() {
                    let f = tables_to_morphism(&p, &q, homs[i].clone());
                    let g = tables_to_morphism(&p, &q, homs[j].clone());
                    let incl = equalizer(&f, &g)?;
                    let re = sheafify_strict(incl.src(), cov, max_iter)?;
                    let a_incl = sheafify_morphism(&incl, &re, &rp)?;
                    let af = sheafify_morphism(&f, &rp, &rq)?;
                    let ag = sheafify_morphism(&g, &rp, &rq)?;
                    let eq = equalizer(&af, &ag)?;
                    let preserved = (0..n).all(|w| {
                        let img: BTreeSet<usize> = (0..re.sheaf.at(w).len()).map(|x| a_incl.apply(w, x)).collect();
                        let eq_img: BTreeSet<usize> = (0..eq.src().at(w).len()).map(|k| eq.apply(w, k)).collect();
                        img.len() == re.sheaf.at(w).len() && img == eq_img
                    });
                    if !preserved {
                        return Ok(Some(NonLexWitness {
                            source: p.to_spec(),
                            target: q.to_spec(),
                            left: homs[i].clone(),
                            right: homs[j].clone(),
                            sheafified_equalizer: re.sheaf.size(),
                            equalizer_of_sheafified: eq.src().size(),
                        }));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Sizes along the two routes to a pseudo-pullback of sheaves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PseudoPullbackMeasurement {
    /// The pseudo-pullback of the presheaf cospan.
    pub presheaf_apex: usize,
    /// Its sheafification.
    pub sheafified_apex: usize,
    /// The pseudo-pullback of the sheafified cospan, taken among sheaves.
    pub sheaf_apex: usize,
    pub isomorphic: bool,
}

fn reflect(p: &Arc<Presheaf>, cov: &Coverage<ThinCat>, max_iter: usize) -> Result<ReflectionResult, ReflectError> {
    sheafify_strict(p, cov, max_iter)
}

/// Compares `a` of the pseudo-pullback of `left: F → H`, `right: G → H`
/// with the pseudo-pullback of `a(left)` and `a(right)` among sheaves.
pub fn pseudo_pullback_preserved(
    left: &PresheafMorphism,
    right: &PresheafMorphism,
    cov: &Coverage<ThinCat>,
    max_iter: usize,
) -> Result<PseudoPullbackMeasurement, ReflectError> {
    let pp = psh_pseudo_pullback(left, right)?;
    let apex = pp.e.src();
    let ra = reflect(apex, cov, max_iter)?;
    let (rf, rg, rh) = (
        reflect(left.src(), cov, max_iter)?,
        reflect(right.src(), cov, max_iter)?,
        reflect(left.dst(), cov, max_iter)?,
    );
    let al = sheafify_morphism(left, &rf, &rh)?;
    let ar = sheafify_morphism(right, &rg, &rh)?;
    let day = day_convolve(&rf.sheaf, &rg.sheaf)?;
    let (pi1, pi2) = day_projections(&rf.sheaf, &rg.sheaf, &day)?;
    let rt = reflect(&day.presheaf, cov, max_iter)?;
    let q1 = extend_along_unit(&rt, &pi1)?;
    let q2 = extend_along_unit(&rt, &pi2)?;
    let e = equalizer(&al.after(&q1)?, &ar.after(&q2)?)?;
    Ok(PseudoPullbackMeasurement {
        presheaf_apex: apex.size(),
        sheafified_apex: ra.sheaf.size(),
        sheaf_apex: e.src().size(),
        isomorphic: isomorphic(&ra.sheaf, e.src()),
    })
}
