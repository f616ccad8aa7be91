//! Semicartesian monoidal categories with finite, enumerable hom-sets.
//!
//! Instances supply their own structure morphisms, so deliberately broken
//! instances can be built and caught by the coherence suite.

mod appendix;
mod finset_cat;
mod product;
mod thin;

use std::fmt::Debug;
use std::hash::Hash;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::finset::FinSetError;

pub use appendix::{verify_appendix_suite, AppendixReport, DiagramCheck};
pub use finset_cat::{Defect, FinSetCat};
pub use product::ProductCat;
pub use thin::{ThinCat, ThinMor};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MonCatError {
    #[error("{category} is not semicartesian: no unique arrow {object} → 1")]
    NotSemicartesian { category: String, object: String },
    #[error("codomain mismatch: {0}")]
    CodomainMismatch(String),
    #[error("cannot compose: {0}")]
    Composition(String),
    #[error("not a parallel pair: {0}")]
    NotParallel(String),
    #[error("{0} has no unit, so it is not monoidal")]
    NoUnit(String),
    #[error("{0} has no braiding")]
    NoBraiding(String),
    #[error(transparent)]
    FinSet(#[from] FinSetError),
}

/// A monoidal category whose hom-sets can be enumerated.
///
/// `objects` lists the objects that checks quantify over; tensors of them may
/// fall outside that list and must still be supported.
pub trait MonoidalCategory: Send + Sync {
    type Obj: Clone + Eq + Ord + Hash + Debug + Send + Sync;
    type Mor: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn name(&self) -> String;
    fn objects(&self) -> Vec<Self::Obj>;
    fn describe(&self, a: &Self::Obj) -> String {
        format!("{a:?}")
    }
    /// The bound on object size that `objects` respects, if any.
    fn size_bound(&self) -> Option<usize> {
        None
    }

    fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Vec<Self::Mor>;
    fn dom(&self, f: &Self::Mor) -> Self::Obj;
    fn cod(&self, f: &Self::Mor) -> Self::Obj;
    fn id(&self, a: &Self::Obj) -> Self::Mor;
    /// `compose(g, f)` is `g ∘ f`.
    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Result<Self::Mor, MonCatError>;

    fn tensor(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj;
    fn tensor_mor(&self, f: &Self::Mor, g: &Self::Mor) -> Self::Mor;
    fn unit(&self) -> Self::Obj;
    /// `(A⊗B)⊗C → A⊗(B⊗C)`.
    fn associator(&self, a: &Self::Obj, b: &Self::Obj, c: &Self::Obj) -> Self::Mor;
    /// `1⊗A → A`.
    fn left_unitor(&self, a: &Self::Obj) -> Self::Mor;
    /// `A⊗1 → A`.
    fn right_unitor(&self, a: &Self::Obj) -> Self::Mor;
    /// `A⊗B → B⊗A`, when the instance is braided.
    fn braiding(&self, a: &Self::Obj, b: &Self::Obj) -> Option<Self::Mor>;
    /// The unique arrow `A → 1`, when the unit is terminal.
    fn terminal(&self, a: &Self::Obj) -> Option<Self::Mor>;

    fn equalizer(&self, f: &Self::Mor, g: &Self::Mor) -> Result<(Self::Obj, Self::Mor), MonCatError>;

    /// Every `k` with `m ∘ k = h` for all constraint pairs `(m, h)`, up to `limit`.
    fn lifts(&self, constraints: &[(Self::Mor, Self::Mor)], limit: usize) -> Vec<Self::Mor> {
        let Some((m0, h0)) = constraints.first() else {
            return Vec::new();
        };
        let (src, dst) = (self.dom(h0), self.dom(m0));
        self.hom(&src, &dst)
            .into_iter()
            .filter(|k| constraints.iter().all(|(m, h)| self.compose(m, k).as_ref() == Ok(h)))
            .take(limit)
            .collect()
    }

    /// A genuine pullback, computed without reference to the tensor.
    fn pullback(&self, _f: &Self::Mor, _g: &Self::Mor) -> Option<(Self::Obj, Self::Mor, Self::Mor)> {
        None
    }

    /// Whether the tensor is the categorical product.
    fn is_cartesian(&self) -> bool {
        false
    }
}

/// Composes a chain written in mathematical order: `[h, g, f]` is `h ∘ g ∘ f`.
pub fn compose_chain<C: MonoidalCategory>(c: &C, chain: &[&C::Mor]) -> Result<C::Mor, MonCatError> {
    let (last, rest) = chain.split_last().expect("non-empty chain");
    let mut acc = (*last).clone();
    for g in rest.iter().rev() {
        acc = c.compose(g, &acc)?;
    }
    Ok(acc)
}

fn bang<C: MonoidalCategory>(c: &C, a: &C::Obj) -> Result<C::Mor, MonCatError> {
    c.terminal(a).ok_or_else(|| MonCatError::NotSemicartesian {
        category: c.name(),
        object: c.describe(a),
    })
}

/// `π1 = ρ_X ∘ (id_X ⊗ !_Y) : X⊗Y → X`.
pub fn projection1<C: MonoidalCategory>(c: &C, x: &C::Obj, y: &C::Obj) -> Result<C::Mor, MonCatError> {
    let t = c.tensor_mor(&c.id(x), &bang(c, y)?);
    c.compose(&c.right_unitor(x), &t)
}

/// `π2 = λ_Y ∘ (!_X ⊗ id_Y) : X⊗Y → Y`.
pub fn projection2<C: MonoidalCategory>(c: &C, x: &C::Obj, y: &C::Obj) -> Result<C::Mor, MonCatError> {
    let t = c.tensor_mor(&bang(c, x)?, &c.id(y));
    c.compose(&c.left_unitor(y), &t)
}

/// The equalizer of `f∘π1` and `g∘π2` on `A⊗B`, with its projections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PseudoPullback<C: MonoidalCategory> {
    pub apex: C::Obj,
    pub e: C::Mor,
    pub p1: C::Mor,
    pub p2: C::Mor,
}

pub fn pseudo_pullback<C: MonoidalCategory>(c: &C, f: &C::Mor, g: &C::Mor) -> Result<PseudoPullback<C>, MonCatError> {
    if c.cod(f) != c.cod(g) {
        return Err(MonCatError::CodomainMismatch(format!(
            "{} vs {}",
            c.describe(&c.cod(f)),
            c.describe(&c.cod(g))
        )));
    }
    let (a, b) = (c.dom(f), c.dom(g));
    let pi1 = projection1(c, &a, &b)?;
    let pi2 = projection2(c, &a, &b)?;
    let (apex, e) = c.equalizer(&c.compose(f, &pi1)?, &c.compose(g, &pi2)?)?;
    Ok(PseudoPullback {
        apex,
        p1: c.compose(&pi1, &e)?,
        p2: c.compose(&pi2, &e)?,
        e,
    })
}

/// Decides whether the comparison `U ⊗ Eq(f,g) → Eq(id⊗f, id⊗g)` is invertible.
pub fn tensor_preserves_equalizers<C: MonoidalCategory>(
    c: &C,
    u: &C::Obj,
    f: &C::Mor,
    g: &C::Mor,
) -> Result<bool, MonCatError> {
    if c.cod(f) != c.cod(g) {
        return Err(MonCatError::CodomainMismatch(format!(
            "{} vs {}",
            c.describe(&c.cod(f)),
            c.describe(&c.cod(g))
        )));
    }
    let id_u = c.id(u);
    let (_, e) = c.equalizer(f, g)?;
    let (_, e2) = c.equalizer(&c.tensor_mor(&id_u, f), &c.tensor_mor(&id_u, g))?;
    let ue = c.tensor_mor(&id_u, &e);
    let gamma = c.lifts(&[(e2.clone(), ue.clone())], 2);
    let back = c.lifts(&[(ue, e2)], 2);
    let (Some(gamma), Some(back)) = (gamma.first(), back.first()) else {
        return Ok(false);
    };
    Ok(c.compose(back, gamma)? == c.id(&c.dom(gamma)) && c.compose(gamma, back)? == c.id(&c.dom(back)))
}

/// Whether `U ⊗ −` preserves every equalizer of a parallel pair, over all
/// objects of the instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Regularity {
    pub pairs_checked: usize,
    pub holds: bool,
    /// `(U, f, g)` of the first failure.
    pub failure: Option<(String, String, String)>,
}

pub fn tensor_regularity<C: MonoidalCategory>(c: &C) -> Result<Regularity, MonCatError> {
    let objs = c.objects();
    let mut pairs = Vec::new();
    for a in &objs {
        for b in &objs {
            let homs = c.hom(a, b);
            for (i, f) in homs.iter().enumerate() {
                pairs.extend(homs[i..].iter().map(|g| (f.clone(), g.clone())));
            }
        }
    }
    let cells: Vec<_> = pairs.iter().flat_map(|p| objs.iter().map(move |u| (p, u))).collect();
    let failure = cells
        .par_iter()
        .enumerate()
        .map(|(k, ((f, g), u))| match tensor_preserves_equalizers(c, u, f, g) {
            Ok(true) => None,
            Ok(false) => Some(Ok((k, (c.describe(u), format!("{f:?}"), format!("{g:?}"))))),
            Err(e) => Some(Err(e)),
        })
        .find_map_first(|x| x)
        .transpose()?;
    Ok(match failure {
        Some((k, w)) => Regularity {
            pairs_checked: k + 1,
            holds: false,
            failure: Some(w),
        },
        None => Regularity {
            pairs_checked: cells.len(),
            holds: true,
            failure: None,
        },
    })
}

/// Outcome of the factorization search for one ordered pair of legs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactorizationWitness {
    pub i: usize,
    pub j: usize,
    pub left_found: bool,
    pub right_found: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LrReport {
    pub holds: bool,
    pub pairs: Vec<FactorizationWitness>,
}

impl LrReport {
    pub fn first_failure(&self) -> Option<&FactorizationWitness> {
        self.pairs.iter().find(|w| !w.left_found || !w.right_found)
    }
}

/// Searches for the `l` and `r` arrows comparing the pseudo-pullback of
/// `V⊗f_i, V⊗f_j` (resp. `f_i⊗V, f_j⊗V`) with `V ⊗ (U_i ×' U_j)` (resp. `(U_i ×' U_j) ⊗ V`).
pub fn exists_l_r_factorizations<C: MonoidalCategory>(
    c: &C,
    legs: &[C::Mor],
    v: &C::Obj,
) -> Result<LrReport, MonCatError> {
    let id_v = c.id(v);
    let mut pairs = Vec::new();
    for (i, fi) in legs.iter().enumerate() {
        for (j, fj) in legs.iter().enumerate() {
            let inner = pseudo_pullback(c, fi, fj)?;
            let left = pseudo_pullback(c, &c.tensor_mor(&id_v, fi), &c.tensor_mor(&id_v, fj))?;
            let l = c.lifts(
                &[
                    (c.tensor_mor(&id_v, &inner.p1), left.p1.clone()),
                    (c.tensor_mor(&id_v, &inner.p2), left.p2.clone()),
                ],
                1,
            );
            let right = pseudo_pullback(c, &c.tensor_mor(fi, &id_v), &c.tensor_mor(fj, &id_v))?;
            let r = c.lifts(
                &[
                    (c.tensor_mor(&inner.p1, &id_v), right.p1.clone()),
                    (c.tensor_mor(&inner.p2, &id_v), right.p2.clone()),
                ],
                1,
            );
            pairs.push(FactorizationWitness {
                i,
                j,
                left_found: !l.is_empty(),
                right_found: !r.is_empty(),
            });
        }
    }
    Ok(LrReport {
        holds: pairs.iter().all(|w| w.left_found && w.right_found),
        pairs,
    })
}

/// All `u` with `(id_U ⊗ e) ∘ u = a ∘ (id ⊗ π2) ∘ e'`, where `e` is the
/// pseudo-pullback equalizer of `f_i, f_j` and `e'` that of `U⊗f_i, U⊗f_j`.
/// At most two are returned, enough to decide uniqueness.
pub fn comparison_arrows<C: MonoidalCategory>(
    c: &C,
    u: &C::Obj,
    fi: &C::Mor,
    fj: &C::Mor,
) -> Result<Vec<C::Mor>, MonCatError> {
    let id_u = c.id(u);
    let (vi, vj) = (c.dom(fi), c.dom(fj));
    let inner = pseudo_pullback(c, fi, fj)?;
    let outer = pseudo_pullback(c, &c.tensor_mor(&id_u, fi), &c.tensor_mor(&id_u, fj))?;
    let uvi = c.tensor(u, &vi);
    let target = compose_chain(
        c,
        &[
            &c.associator(u, &vi, &vj),
            &c.tensor_mor(&c.id(&uvi), &projection2(c, u, &vj)?),
            &outer.e,
        ],
    )?;
    Ok(c.lifts(&[(c.tensor_mor(&id_u, &inner.e), target)], 2))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::finset::{self, FinMap, FinSetObj};
    use crate::quantale::{build_standard, StandardQuantale};

    fn luk3() -> ThinCat {
        ThinCat::new(Arc::new(build_standard(StandardQuantale::LukasiewiczChain, 3).unwrap())).unwrap()
    }

    #[test]
    fn bundled_instances_are_regular() {
        for r in [
            tensor_regularity(&FinSetCat::new(2)).unwrap(),
            tensor_regularity(&luk3()).unwrap(),
        ] {
            assert!(r.holds && r.pairs_checked > 0, "{r:?}");
        }
    }

    #[test]
    fn finset_projections_are_pair_projections() {
        let c = FinSetCat::new(3);
        let (a, b) = (FinSetObj::range(2), FinSetObj::range(3));
        let prod = finset::product(&a, &b);
        assert_eq!(projection1(&c, &a, &b).unwrap(), prod.proj1);
        assert_eq!(projection2(&c, &a, &b).unwrap(), prod.proj2);
    }

    #[test]
    fn thin_pseudo_pullback_is_multiplication() {
        let c = luk3();
        let q = c.quantale();
        let (h, one) = (q.index_of("h").unwrap(), q.index_of("1").unwrap());
        let f = ThinMor::new(h, one);
        let ppb = pseudo_pullback(&c, &f, &f).unwrap();
        assert_eq!(q.label(ppb.apex), "0");
        for a in 0..q.len() {
            for b in 0..q.len() {
                let top = q.top();
                let ppb = pseudo_pullback(&c, &ThinMor::new(a, top), &ThinMor::new(b, top)).unwrap();
                assert_eq!(ppb.apex, q.mul(a, b));
            }
        }
    }

    #[test]
    fn finset_pseudo_pullback_matches_pullback() {
        let c = FinSetCat::new(3);
        let (a, b, t) = (FinSetObj::range(2), FinSetObj::range(3), FinSetObj::range(2));
        for f in FinMap::all(&a, &t) {
            for g in FinMap::all(&b, &t) {
                let ppb = pseudo_pullback(&c, &f, &g).unwrap();
                let (pb, q1, q2) = finset::pullback(&f, &g).unwrap();
                assert_eq!(ppb.apex.len(), pb.len());
                // The unique comparison iso commutes with the projections.
                let isos: Vec<FinMap> = FinMap::all(&ppb.apex, &pb)
                    .filter(|k| k.is_bijective() && q1.after(k).unwrap() == ppb.p1 && q2.after(k).unwrap() == ppb.p2)
                    .collect();
                assert_eq!(isos.len(), 1);
            }
        }
    }

    #[test]
    fn product_pseudo_pullback_is_componentwise() {
        let c = ProductCat::new(FinSetCat::new(2), luk3());
        let q = c.right().quantale().clone();
        let (a, t) = (FinSetObj::range(2), FinSetObj::range(1));
        let f = FinMap::to_point(&a, &t);
        let h = q.index_of("h").unwrap();
        let m = ThinMor::new(h, q.top());
        let ppb = pseudo_pullback(&c, &(f.clone(), m), &(f.clone(), m)).unwrap();
        let left = pseudo_pullback(c.left(), &f, &f).unwrap();
        let right = pseudo_pullback(c.right(), &m, &m).unwrap();
        assert_eq!(ppb.apex, (left.apex, right.apex));
        assert_eq!(ppb.p1, (left.p1, right.p1));
    }

    #[test]
    fn codomain_mismatch_is_reported() {
        let c = FinSetCat::new(2);
        let f = FinMap::identity(&FinSetObj::range(1));
        let g = FinMap::identity(&FinSetObj::range(2));
        assert!(matches!(
            pseudo_pullback(&c, &f, &g),
            Err(MonCatError::CodomainMismatch(_))
        ));
    }

    #[test]
    fn finset_tensor_preserves_equalizers() {
        let c = FinSetCat::new(2);
        let objs = c.objects();
        for u in &objs {
            for a in &objs {
                for b in &objs {
                    for f in FinMap::all(a, b) {
                        for g in FinMap::all(a, b) {
                            assert!(tensor_preserves_equalizers(&c, u, &f, &g).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn thin_and_product_preserve_equalizers() {
        let c = luk3();
        let q = c.quantale().clone();
        for u in 0..q.len() {
            for a in 0..q.len() {
                let f = ThinMor::new(a, q.top());
                assert!(tensor_preserves_equalizers(&c, &u, &f, &f).unwrap());
            }
        }
        let p = ProductCat::new(FinSetCat::new(2), luk3());
        let a = FinSetObj::range(2);
        let f = FinMap::identity(&a);
        let g = FinMap::from_indices(a.clone(), a.clone(), vec![1, 0]).unwrap();
        let m = ThinMor::new(0, 2);
        assert!(tensor_preserves_equalizers(&p, &(a, 1), &(f.clone(), m), &(g, m)).unwrap());
    }

    #[test]
    fn factorizations_exist_in_lawful_instances() {
        let c = luk3();
        let q = c.quantale().clone();
        let h = q.index_of("h").unwrap();
        let legs = [ThinMor::new(h, h), ThinMor::new(h, h)];
        for v in 0..q.len() {
            assert!(exists_l_r_factorizations(&c, &legs, &v).unwrap().holds);
        }
        let s = FinSetCat::new(2);
        let u = FinSetObj::range(2);
        let legs = [
            FinMap::from_indices(FinSetObj::range(1), u.clone(), vec![0]).unwrap(),
            FinMap::from_indices(FinSetObj::range(2), u.clone(), vec![1, 1]).unwrap(),
        ];
        for v in s.objects() {
            assert!(exists_l_r_factorizations(&s, &legs, &v).unwrap().holds);
        }
    }

    #[test]
    fn skewed_tensor_lacks_l() {
        let s = FinSetCat::with_defect(2, Defect::SkewedTensor);
        assert!(s.braiding(&FinSetObj::range(1), &FinSetObj::range(1)).is_none());
        let legs = [FinMap::to_point(&FinSetObj::range(2), &FinSetObj::range(1))];
        let report = exists_l_r_factorizations(&s, &legs, &FinSetObj::range(2)).unwrap();
        assert!(!report.holds);
        assert!(report.first_failure().is_some());
    }

    #[test]
    fn comparison_arrow_is_unique_when_equalizers_are_preserved() {
        let s = FinSetCat::new(2);
        let u = FinSetObj::range(2);
        let fi = FinMap::from_indices(FinSetObj::range(2), u.clone(), vec![0, 1]).unwrap();
        let fj = FinMap::from_indices(FinSetObj::range(2), u.clone(), vec![1, 1]).unwrap();
        for w in s.objects() {
            assert_eq!(comparison_arrows(&s, &w, &fi, &fj).unwrap().len(), 1);
        }
    }
}
