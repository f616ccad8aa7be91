//! Sheaf conditions for coverages on thin sites.
//!
//! Two independent checkers are provided: the equalizer diagram
//! `F(U) → ∏ F(U_i) ⇉ ∏ F(U_i ⊙ U_j)`, and orthogonality against the
//! canonical morphism of each cover's sieve.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::coverage::{Coverage, Family};
use crate::finset::{self, tuple_label, FinMap, FinSetObj};
use crate::moncat::{MonoidalCategory, ThinCat};
use crate::presheaf::{hom_presheaves, same_site, sieve_of, HomSearch, Presheaf, PresheafError, PresheafMorphism};

/// Above this many candidate tuples the equalizer check enumerates
/// compatible families instead of materializing the products.
pub const LITERAL_THRESHOLD: usize = 4096;

const WITNESS_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SheafError {
    #[error("section {index} is not an element of F({object})")]
    SectionOutOfSet { index: usize, object: String },
    #[error("expected {expected} sections, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("the family is not compatible")]
    NotCompatible,
    #[error("coverage and presheaf live on different sites: {0} vs {1}")]
    SiteMismatch(String, String),
    #[error("{0} is not a locale")]
    NotLocale(String),
    #[error("{0} is not semicartesian")]
    NotSemicartesian(String),
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
}

fn check_sites(f: &Presheaf, cov: &Coverage<ThinCat>) -> Result<(), SheafError> {
    if !same_site(f.site(), cov.site()) {
        return Err(SheafError::SiteMismatch(f.site().name(), cov.site().name()));
    }
    if !f.quantale().classify().semicartesian {
        return Err(SheafError::NotSemicartesian(f.quantale().name().into()));
    }
    Ok(())
}

fn doms(cover: &Family<ThinCat>) -> Vec<usize> {
    cover.legs.iter().map(|m| m.dom).collect()
}

/// Whether `sections[i] ∈ F(u_i)` agree pairwise on every `u_i ⊙ u_j`.
pub fn is_compatible(f: &Presheaf, cover: &Family<ThinCat>, sections: &[usize]) -> Result<bool, SheafError> {
    let d = doms(cover);
    if sections.len() != d.len() {
        return Err(SheafError::WrongLength {
            expected: d.len(),
            got: sections.len(),
        });
    }
    for (i, (&x, &u)) in sections.iter().zip(&d).enumerate() {
        if x >= f.at(u).len() {
            return Err(SheafError::SectionOutOfSet {
                index: i,
                object: f.quantale().label(u).into(),
            });
        }
    }
    let q = f.quantale();
    Ok((0..d.len()).all(|i| {
        (0..d.len()).all(|j| {
            let m = q.mul(d[i], d[j]);
            f.restrict(m, d[i], sections[i]) == f.restrict(m, d[j], sections[j])
        })
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Gluing {
    Unique(usize),
    None,
    Multiple(Vec<usize>),
}

/// Every `x ∈ F(U)` restricting to the given sections.
pub fn glue(f: &Presheaf, cover: &Family<ThinCat>, sections: &[usize]) -> Result<Gluing, SheafError> {
    if !is_compatible(f, cover, sections)? {
        return Err(SheafError::NotCompatible);
    }
    let u = cover.target;
    let found: Vec<usize> = (0..f.at(u).len())
        .filter(|&x| {
            cover
                .legs
                .iter()
                .zip(sections)
                .all(|(m, &s)| f.restrict(m.dom, u, x) == s)
        })
        .collect();
    Ok(match found.len() {
        0 => Gluing::None,
        1 => Gluing::Unique(found[0]),
        _ => Gluing::Multiple(found),
    })
}

/// All compatible families on `cover`, by backtracking over legs.
pub fn compatible_families(f: &Presheaf, cover: &Family<ThinCat>) -> Vec<Vec<usize>> {
    let d = doms(cover);
    let q = f.quantale();
    let meets: Vec<Vec<usize>> = d.iter().map(|&a| d.iter().map(|&b| q.mul(a, b)).collect()).collect();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d.len());
    fn go(f: &Presheaf, d: &[usize], meets: &[Vec<usize>], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = cur.len();
        if i == d.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..f.at(d[i]).len() {
            let ok = (0..i).all(|j| {
                let m = meets[i][j];
                f.restrict(m, d[i], x) == f.restrict(m, d[j], cur[j])
            });
            if ok {
                cur.push(x);
                go(f, d, meets, cur, out);
                cur.pop();
            }
        }
    }
    go(f, &d, &meets, &mut cur, &mut out);
    out
}

/// Restrictions of `x ∈ F(U)` to the legs.
fn restrictions(f: &Presheaf, cover: &Family<ThinCat>, x: usize) -> Vec<usize> {
    cover.legs.iter().map(|m| f.restrict(m.dom, cover.target, x)).collect()
}

/// How one cover fails: families without gluing, and groups of distinct
/// elements with the same restrictions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoverDefects {
    pub missing: Vec<Vec<usize>>,
    pub multiple: Vec<(Vec<usize>, Vec<usize>)>,
}

impl CoverDefects {
    pub fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.multiple.is_empty()
    }
}

/// Gluing defects of one cover, by enumerating compatible families.
pub fn cover_defects(f: &Presheaf, cover: &Family<ThinCat>) -> CoverDefects {
    let mut by_image: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for x in 0..f.at(cover.target).len() {
        by_image.entry(restrictions(f, cover, x)).or_default().push(x);
    }
    let mut out = CoverDefects::default();
    for fam in compatible_families(f, cover) {
        match by_image.get(&fam) {
            None => out.missing.push(fam),
            Some(xs) if xs.len() > 1 => out.multiple.push((fam, xs.clone())),
            Some(_) => {}
        }
    }
    out
}

/// Gluing defects of one cover, by materializing the equalizer diagram.
/// Returns `None` when the products exceed the threshold.
pub fn cover_defects_literal(f: &Presheaf, cover: &Family<ThinCat>, threshold: usize) -> Option<CoverDefects> {
    let d = doms(cover);
    let q = f.quantale();
    // (i, i) is automatic and (j, i) mirrors (i, j) when both projections are restrictions
    let pairs: Vec<(usize, usize)> = (0..d.len())
        .flat_map(|i| (i + 1..d.len()).map(move |j| (i, j)))
        .collect();
    let dom_size = d.iter().try_fold(1usize, |acc, &u| acc.checked_mul(f.at(u).len()))?;
    let cod_size = pairs
        .iter()
        .try_fold(1usize, |acc, &(i, j)| acc.checked_mul(f.at(q.mul(d[i], d[j])).len()))?;
    if dom_size > threshold || cod_size > threshold.saturating_mul(16) {
        return None;
    }
    let u = cover.target;
    // both products as mixed-radix index spaces; only the tables are built
    let radix: Vec<usize> = d.iter().map(|&v| f.at(v).len()).collect();
    let meet_of: Vec<usize> = pairs.iter().map(|&(i, j)| q.mul(d[i], d[j])).collect();
    let decode = |mut k: usize| -> Vec<usize> {
        let mut xs = vec![0; radix.len()];
        for (slot, &r) in xs.iter_mut().zip(&radix).rev() {
            *slot = k % r;
            k /= r;
        }
        xs
    };
    let encode = |xs: &[usize]| xs.iter().zip(&radix).fold(0, |acc, (&x, &r)| acc * r + x);
    let side = |first: bool| -> Vec<usize> {
        (0..dom_size)
            .map(|k| {
                let xs = decode(k);
                pairs.iter().zip(&meet_of).fold(0, |acc, (&(i, j), &m)| {
                    let y = if first {
                        f.restrict(m, d[i], xs[i])
                    } else {
                        f.restrict(m, d[j], xs[j])
                    };
                    acc * f.at(m).len() + y
                })
            })
            .collect()
    };
    let (p, r) = (side(true), side(false));
    let eq: Vec<usize> = (0..dom_size).filter(|&k| p[k] == r[k]).collect();
    let mut fibres: Vec<Vec<usize>> = vec![Vec::new(); eq.len()];
    for x in 0..f.at(u).len() {
        let t = encode(&restrictions(f, cover, x));
        let k = eq.binary_search(&t).expect("restrictions are compatible");
        fibres[k].push(x);
    }
    let mut out = CoverDefects::default();
    for (k, &t) in eq.iter().enumerate() {
        match fibres[k].len() {
            0 => out.missing.push(decode(t)),
            1 => {}
            _ => out.multiple.push((decode(t), fibres[k].clone())),
        }
    }
    Some(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Sheaf,
    SeparatedOnly,
    Fails,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Sheaf => "sheaf",
            Verdict::SeparatedOnly => "separated_only",
            Verdict::Fails => "fails",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SheafMethod {
    Equalizer,
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    NoGluing,
    MultipleGluings,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SheafWitness {
    pub cover: String,
    pub kind: WitnessKind,
    pub sections: Vec<String>,
    pub gluings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SheafReport {
    pub method: SheafMethod,
    pub coverage: String,
    pub verdict: Verdict,
    pub covers_checked: usize,
    pub failing_covers: usize,
    /// Covers decided by materializing the products (equalizer method only).
    pub literal_covers: usize,
    pub witnesses: Vec<SheafWitness>,
}

impl SheafReport {
    pub fn is_sheaf(&self) -> bool {
        self.verdict == Verdict::Sheaf
    }
}

fn witnesses_for(
    f: &Presheaf,
    cov: &Coverage<ThinCat>,
    cover: &Family<ThinCat>,
    defects: &CoverDefects,
) -> Vec<SheafWitness> {
    let d = doms(cover);
    let label = |fam: &[usize]| -> Vec<String> {
        fam.iter()
            .zip(&d)
            .map(|(&x, &u)| f.at(u).label(x).to_string())
            .collect()
    };
    let mut out = Vec::new();
    for fam in &defects.missing {
        out.push(SheafWitness {
            cover: cov.describe_family(cover),
            kind: WitnessKind::NoGluing,
            sections: label(fam),
            gluings: Vec::new(),
        });
    }
    for (fam, xs) in &defects.multiple {
        out.push(SheafWitness {
            cover: cov.describe_family(cover),
            kind: WitnessKind::MultipleGluings,
            sections: label(fam),
            gluings: xs.iter().map(|&x| f.at(cover.target).label(x).to_string()).collect(),
        });
    }
    out
}

fn assemble(
    method: SheafMethod,
    cov: &Coverage<ThinCat>,
    per_cover: Vec<(bool, Vec<SheafWitness>, bool)>,
) -> SheafReport {
    let covers_checked = per_cover.len();
    let literal_covers = per_cover.iter().filter(|(lit, _, _)| *lit).count();
    let mut failing_covers = 0;
    let mut any_multiple = false;
    let mut witnesses = Vec::new();
    for (_, ws, multiple) in per_cover {
        if !ws.is_empty() {
            failing_covers += 1;
        }
        any_multiple |= multiple;
        for w in ws {
            if witnesses.len() < WITNESS_CAP {
                witnesses.push(w);
            }
        }
    }
    let verdict = if failing_covers == 0 {
        Verdict::Sheaf
    } else if any_multiple {
        Verdict::Fails
    } else {
        Verdict::SeparatedOnly
    };
    SheafReport {
        method,
        coverage: cov.name().to_string(),
        verdict,
        covers_checked,
        failing_covers,
        literal_covers,
        witnesses,
    }
}

/// The equalizer form of the sheaf condition, for every enumerated cover.
pub fn check_sheaf_equalizer(f: &Presheaf, cov: &Coverage<ThinCat>) -> Result<SheafReport, SheafError> {
    check_sheaf_equalizer_with(f, cov, LITERAL_THRESHOLD)
}

pub fn check_sheaf_equalizer_with(
    f: &Presheaf,
    cov: &Coverage<ThinCat>,
    threshold: usize,
) -> Result<SheafReport, SheafError> {
    check_sites(f, cov)?;
    let covers: Vec<&Family<ThinCat>> = cov.all_families().collect();
    let per_cover = covers
        .par_iter()
        .map(|c| {
            let (literal, defects) = match cover_defects_literal(f, c, threshold) {
                Some(d) => (true, d),
                None => (false, cover_defects(f, c)),
            };
            (
                literal,
                witnesses_for(f, cov, c, &defects),
                !defects.multiple.is_empty(),
            )
        })
        .collect();
    Ok(assemble(SheafMethod::Equalizer, cov, per_cover))
}

/// The local-object form: precomposition with each sieve's canonical
/// morphism must be a bijection `Hom(y(U), F) → Hom(S, F)`.
pub fn check_sheaf_orthogonal(f: &Presheaf, cov: &Coverage<ThinCat>) -> Result<SheafReport, SheafError> {
    check_sites(f, cov)?;
    let site = Arc::clone(cov.site());
    let fa = Arc::new(f.clone().on_site(Arc::clone(&site))?);
    let covers: Vec<&Family<ThinCat>> = cov.all_families().collect();
    let per_cover: Result<Vec<_>, SheafError> = covers
        .par_iter()
        .map(|c| {
            let sieve = sieve_of(&site, c)?;
            let y = Arc::clone(sieve.canonical.dst());
            let from_y = hom_presheaves(&y, &fa)?;
            let from_s = HomSearch::new(&sieve.presheaf, &fa)?.collect_tables();
            let mut image: HashMap<Vec<Vec<usize>>, Vec<usize>> = HashMap::new();
            for phi in &from_y {
                let composite = phi.after(&sieve.canonical)?;
                let tables: Vec<Vec<usize>> = composite.components().iter().map(|m| m.table().to_vec()).collect();
                image.entry(tables).or_default().push(phi.apply(c.target, 0));
            }
            // read the sections of a morphism S → F off the legs
            let sections = |t: &Vec<Vec<usize>>| -> Vec<usize> {
                sieve
                    .legs
                    .iter()
                    .zip(&c.legs)
                    .map(|(leg, m)| t[m.dom][leg.apply(m.dom, 0)])
                    .collect()
            };
            let mut defects = CoverDefects::default();
            for t in &from_s {
                match image.get(t) {
                    None => defects.missing.push(sections(t)),
                    Some(xs) if xs.len() > 1 => defects.multiple.push((sections(t), xs.clone())),
                    Some(_) => {}
                }
            }
            defects.missing.sort();
            defects.multiple.sort();
            Ok((false, witnesses_for(f, cov, c, &defects), !defects.multiple.is_empty()))
        })
        .collect();
    Ok(assemble(SheafMethod::Orthogonal, cov, per_cover?))
}

/// At most one gluing for every compatible family.
pub fn check_separated(f: &Presheaf, cov: &Coverage<ThinCat>) -> Result<bool, SheafError> {
    check_sites(f, cov)?;
    Ok(cov
        .all_families()
        .collect::<Vec<_>>()
        .par_iter()
        .all(|c| cover_defects(f, c).multiple.is_empty()))
}

/// `v ↦ F(u ⊙ v)`.
pub fn shift_presheaf(f: &Presheaf, u: usize) -> Result<Presheaf, SheafError> {
    let q = f.quantale();
    let n = q.len();
    let at = (0..n).map(|v| f.at(q.mul(u, v)).clone()).collect();
    Ok(Presheaf::from_fn(Arc::clone(f.site()), at, |v2, v, x| {
        f.restrict(q.mul(u, v2), q.mul(u, v), x)
    })?)
}

/// `(c, d) ↦ F(c) × G(d)` on the product site, indexed as in `Quantale::product`.
pub fn product_sheaf(f: &Presheaf, g: &Presheaf, site: &Arc<ThinCat>) -> Result<Presheaf, SheafError> {
    let (q1, q2) = (f.quantale(), g.quantale());
    let expected = q1.product(q2);
    if *site.quantale().as_ref() != expected {
        return Err(SheafError::SiteMismatch(site.name(), expected.name().into()));
    }
    let n2 = q2.len();
    let prods: Vec<finset::Product> = (0..q1.len() * n2)
        .map(|k| {
            let (c, d) = (k / n2, k % n2);
            finset::product(f.at(c), g.at(d))
        })
        .collect();
    let at = prods.iter().map(|p| p.obj.clone()).collect();
    Ok(Presheaf::from_fn(Arc::clone(site), at, |v, u, k| {
        let (c, d) = (u / n2, u % n2);
        let (c2, d2) = (v / n2, v % n2);
        let x = prods[u].proj1.apply(k);
        let y = prods[u].proj2.apply(k);
        prods[v].pair(f.restrict(c2, c, x), g.restrict(d2, d, y))
    })?)
}

/// One round of the plus construction on a locale, with its unit `P → P⁺`.
///
/// Elements of `P⁺(U)` are matching families on covers of `U`, identified
/// when they agree locally on every pairwise meet.
pub fn plus_construction(p: &Presheaf, cov: &Coverage<ThinCat>) -> Result<(Presheaf, PresheafMorphism), SheafError> {
    check_sites(p, cov)?;
    let q = Arc::clone(cov.site().quantale());
    if !q.classify().locale {
        return Err(SheafError::NotLocale(q.name().into()));
    }
    let n = q.len();
    // Local equality at w: the meets where a and b agree contain a cover of w.
    let locally_equal = |w: usize, a: usize, b: usize| -> bool {
        if a == b {
            return true;
        }
        cov.families(&w).iter().any(|c| {
            c.legs
                .iter()
                .all(|m| p.restrict(m.dom, w, a) == p.restrict(m.dom, w, b))
        })
    };
    // Matching families on support covers of each object.
    struct Entry {
        cover: Vec<usize>,
        sections: Vec<usize>,
    }
    let mut entries: Vec<Vec<Entry>> = Vec::with_capacity(n);
    for u in 0..n {
        let mut covers: Vec<Vec<usize>> = cov.families(&u).iter().map(doms).collect();
        for c in &mut covers {
            c.sort();
            c.dedup();
        }
        covers.sort();
        covers.dedup();
        let mut list = Vec::new();
        for c in covers {
            let fam =
                crate::coverage::CoverFamily::new(u, c.iter().map(|&d| crate::moncat::ThinMor::new(d, u)).collect());
            for s in compatible_families(p, &fam) {
                list.push(Entry {
                    cover: c.clone(),
                    sections: s,
                });
            }
        }
        entries.push(list);
    }
    let label = |u: usize, e: &Entry| -> String {
        let cover: Vec<&str> = e.cover.iter().map(|&d| q.label(d)).collect();
        let secs: Vec<&str> = e
            .sections
            .iter()
            .zip(&e.cover)
            .map(|(&x, &d)| p.at(d).label(x))
            .collect();
        let _ = u;
        tuple_label(&[tuple_label(&cover), tuple_label(&secs)])
    };
    let equivalent = |a: &Entry, b: &Entry| -> bool {
        a.cover.iter().zip(&a.sections).all(|(&ui, &si)| {
            b.cover.iter().zip(&b.sections).all(|(&uj, &sj)| {
                let m = q.meet(ui, uj);
                locally_equal(m, p.restrict(m, ui, si), p.restrict(m, uj, sj))
            })
        })
    };
    let mut at = Vec::with_capacity(n);
    let mut class: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (u, here) in entries.iter().enumerate() {
        let labels: Vec<String> = here.iter().map(|e| label(u, e)).collect();
        let set = FinSetObj::from_generated(labels.clone());
        let pos: Vec<usize> = labels.iter().map(|l| set.index_of(l).expect("present")).collect();
        let mut pairs = Vec::new();
        for a in 0..here.len() {
            for b in a + 1..here.len() {
                if equivalent(&here[a], &here[b]) {
                    pairs.push((pos[a], pos[b]));
                }
            }
        }
        let (obj, proj) = finset::quotient(&set, pairs);
        class.push(pos.iter().map(|&k| proj.apply(k)).collect());
        at.push(obj);
    }
    // Restricting a family on {u_i} to v gives one on {v ∧ u_i}, normalized to its support.
    let find_entry = |v: usize, cover: &[usize], sections: &[usize]| -> usize {
        let mut pairs: Vec<(usize, usize)> = cover.iter().copied().zip(sections.iter().copied()).collect();
        pairs.sort();
        pairs.dedup();
        let (c, s): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let k = entries[v]
            .iter()
            .position(|e| e.cover == c && e.sections == s)
            .expect("restricted matching families are enumerated");
        class[v][k]
    };
    let reps: Vec<Vec<usize>> = (0..n)
        .map(|u| {
            let mut r = vec![usize::MAX; at[u].len()];
            for (k, &c) in class[u].iter().enumerate() {
                if r[c] == usize::MAX {
                    r[c] = k;
                }
            }
            r
        })
        .collect();
    let plus = Presheaf::from_fn(Arc::clone(cov.site()), at, |v, u, c| {
        let e = &entries[u][reps[u][c]];
        let cover: Vec<usize> = e.cover.iter().map(|&d| q.meet(v, d)).collect();
        let sections: Vec<usize> = e
            .cover
            .iter()
            .zip(&e.sections)
            .map(|(&d, &x)| p.restrict(q.meet(v, d), d, x))
            .collect();
        find_entry(v, &cover, &sections)
    })?;
    let plus = Arc::new(plus);
    let src = Arc::new(p.clone().on_site(Arc::clone(cov.site()))?);
    let comps = (0..n)
        .map(|u| {
            let table = (0..p.at(u).len()).map(|x| find_entry(u, &[u], &[x])).collect();
            FinMap::from_table(src.at(u).clone(), plus.at(u).clone(), table)
        })
        .collect();
    let unit = PresheafMorphism::new(src, Arc::clone(&plus), comps)?;
    Ok(((*plus).clone(), unit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::{canonical_quantale_coverage, product_coverage, CoverFamily};
    use crate::moncat::ThinMor;
    use crate::presheaf::isomorphic;
    use crate::quantale::{build_standard, StandardQuantale};

    fn site(name: StandardQuantale, n: usize) -> Arc<ThinCat> {
        Arc::new(ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap())
    }

    fn fam(u: usize, doms: &[usize]) -> Family<ThinCat> {
        CoverFamily::new(u, doms.iter().map(|&d| ThinMor::new(d, u)).collect())
    }

    /// Sets of the given sizes; every restriction sends everything to element 0
    /// except identities.
    fn collapsing(s: &Arc<ThinCat>, sizes: &[usize]) -> Presheaf {
        let at = sizes.iter().map(|&k| FinSetObj::range(k)).collect();
        Presheaf::from_fn(s.clone(), at, |v, u, x| if v == u { x } else { 0 }).unwrap()
    }

    fn both(f: &Presheaf, cov: &Coverage<ThinCat>) -> Verdict {
        let a = check_sheaf_equalizer(f, cov).unwrap();
        let b = check_sheaf_orthogonal(f, cov).unwrap();
        assert_eq!(a.verdict, b.verdict, "{:?} vs {:?}", a.witnesses, b.witnesses);
        a.verdict
    }

    #[test]
    fn compatibility_examples() {
        let s = site(StandardQuantale::PowersetLocale, 2);
        let q = s.quantale().clone();
        let (x, y) = (q.index_of("{x}").unwrap(), q.index_of("{y}").unwrap());
        let f = collapsing(&s, &[1, 2, 2, 2]);
        assert!(is_compatible(&f, &fam(q.top(), &[x, y]), &[1, 0]).unwrap());
        assert!(is_compatible(&f, &fam(x, &[x]), &[1]).unwrap());
        assert!(matches!(glue(&f, &fam(x, &[x]), &[1]).unwrap(), Gluing::Unique(1)));

        let l = site(StandardQuantale::LukasiewiczChain, 3);
        let q = l.quantale().clone();
        let (h, one) = (q.index_of("h").unwrap(), q.index_of("1").unwrap());
        // F(h) = {0,1}, F(1) = {0,1} with identity-like restriction 1 → h
        let at = vec![FinSetObj::range(1), FinSetObj::range(2), FinSetObj::range(2)];
        let g = Presheaf::from_fn(l.clone(), at, |v, u, x| {
            if v == 0 {
                0
            } else {
                let _ = u;
                x
            }
        })
        .unwrap();
        assert!(!is_compatible(&g, &fam(one, &[h, one]), &[0, 1]).unwrap());
        assert!(matches!(
            is_compatible(&g, &fam(one, &[h]), &[5]),
            Err(SheafError::SectionOutOfSet { .. })
        ));
    }

    #[test]
    fn doubled_top_has_multiple_gluings() {
        let l = site(StandardQuantale::LukasiewiczChain, 3);
        let q = l.quantale().clone();
        let (h, one) = (q.index_of("h").unwrap(), q.index_of("1").unwrap());
        let f = collapsing(&l, &[1, 1, 2]);
        assert_eq!(glue(&f, &fam(one, &[h, one]), &[0, 1]).unwrap(), Gluing::Unique(1));
        let cov = canonical_quantale_coverage(l.clone()).unwrap();
        // {1} covers by itself, so a doubled top is still fine; doubling h is not
        assert_eq!(both(&f, &cov), Verdict::Sheaf);
        // two sections over h never glue along {h, h}
        let g = collapsing(&l, &[1, 2, 1]);
        assert_eq!(both(&g, &cov), Verdict::SeparatedOnly);
        // the empty family of 0 has two gluings
        let g = collapsing(&l, &[2, 1, 1]);
        assert_eq!(both(&g, &cov), Verdict::Fails);
        assert!(!check_separated(&g, &cov).unwrap());
        let _ = h;
    }

    #[test]
    fn terminal_and_representables_are_sheaves() {
        for (name, n) in [
            (StandardQuantale::LukasiewiczChain, 3),
            (StandardQuantale::PowersetLocale, 2),
            (StandardQuantale::TruncatedNat, 3),
        ] {
            let s = site(name, n);
            let cov = canonical_quantale_coverage(s.clone()).unwrap();
            assert_eq!(both(&Presheaf::terminal(s.clone()), &cov), Verdict::Sheaf);
            if name == StandardQuantale::PowersetLocale {
                for u in 0..s.quantale().len() {
                    assert_eq!(both(&Presheaf::yoneda(s.clone(), u), &cov), Verdict::Sheaf);
                }
            }
            assert_eq!(both(&Presheaf::empty(s.clone()), &cov), Verdict::SeparatedOnly);
            assert!(check_separated(&Presheaf::empty(s.clone()), &cov).unwrap());
        }
    }

    #[test]
    fn literal_and_enumerated_agree() {
        let l = site(StandardQuantale::PowersetLocale, 2);
        let cov = canonical_quantale_coverage(l.clone()).unwrap();
        let mut compared = 0;
        for sizes in [[1, 2, 2, 2], [1, 1, 1, 3], [2, 2, 1, 1], [1, 2, 2, 3]] {
            let f = collapsing(&l, &sizes);
            for c in cov.all_families() {
                let mut a = cover_defects(&f, c);
                let Some(mut b) = cover_defects_literal(&f, c, 1 << 12) else {
                    continue;
                };
                compared += 1;
                a.missing.sort();
                b.missing.sort();
                a.multiple.sort();
                b.multiple.sort();
                assert_eq!(a, b);
            }
        }
        assert!(compared > 100);
    }

    #[test]
    fn shift_of_sheaf_is_sheaf() {
        let l = site(StandardQuantale::LukasiewiczChain, 3);
        let cov = canonical_quantale_coverage(l.clone()).unwrap();
        let f = collapsing(&l, &[1, 1, 3]);
        assert!(check_sheaf_equalizer(&f, &cov).unwrap().is_sheaf());
        for u in 0..3 {
            let g = shift_presheaf(&f, u).unwrap();
            assert!(check_sheaf_equalizer(&g, &cov).unwrap().is_sheaf());
        }
        assert_eq!(shift_presheaf(&f, l.quantale().top()).unwrap(), f);
    }

    #[test]
    fn product_of_sheaves() {
        let a = site(StandardQuantale::ChainLocale, 2);
        let b = site(StandardQuantale::LukasiewiczChain, 3);
        let ca = canonical_quantale_coverage(a.clone()).unwrap();
        let cb = canonical_quantale_coverage(b.clone()).unwrap();
        let pc = product_coverage(&ca, &cb).unwrap();
        let f = collapsing(&a, &[1, 2]);
        let g = collapsing(&b, &[1, 1, 2]);
        let fg = product_sheaf(&f, &g, pc.site()).unwrap();
        assert_eq!(both(&fg, &pc), Verdict::Sheaf);
        let t = product_sheaf(
            &Presheaf::terminal(a.clone()),
            &Presheaf::terminal(b.clone()),
            pc.site(),
        )
        .unwrap();
        assert!(isomorphic(&t, &Presheaf::terminal(pc.site().clone())));
        let bad = collapsing(&b, &[1, 2, 2]);
        let fb = product_sheaf(&f, &bad, pc.site()).unwrap();
        assert_ne!(both(&fb, &pc), Verdict::Sheaf);
    }

    #[test]
    fn plus_construction_on_locales() {
        let s = site(StandardQuantale::PowersetLocale, 2);
        let cov = canonical_quantale_coverage(s.clone()).unwrap();
        let t = Presheaf::terminal(s.clone());
        let (tp, unit) = plus_construction(&t, &cov).unwrap();
        assert!(isomorphic(&tp, &t));
        assert!(crate::presheaf::is_iso(&unit));
        for sizes in [[1, 2, 2, 2], [2, 1, 1, 1], [3, 1, 2, 2], [0, 0, 0, 0]] {
            let p = collapsing(&s, &sizes);
            let (p1, _) = plus_construction(&p, &cov).unwrap();
            let (p2, _) = plus_construction(&p1, &cov).unwrap();
            assert!(check_sheaf_equalizer(&p2, &cov).unwrap().is_sheaf(), "{sizes:?}");
            if check_separated(&p, &cov).unwrap() {
                assert!(check_sheaf_equalizer(&p1, &cov).unwrap().is_sheaf());
            }
        }
        let l = site(StandardQuantale::LukasiewiczChain, 3);
        let lc = canonical_quantale_coverage(l.clone()).unwrap();
        assert!(matches!(
            plus_construction(&Presheaf::terminal(l), &lc),
            Err(SheafError::NotLocale(_))
        ));
    }
}
