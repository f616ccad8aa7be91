//! Subsheaves: closure, the lattice of subsheaves, image factorization, and
//! the `*` operation built from the sheafified Day convolution.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::coverage::Coverage;
use crate::finset::FinMap;
use crate::moncat::ThinCat;
use crate::presheaf::{day_convolve, day_projections, equalizer, subpresheaf, HomSearch, Presheaf, PresheafMorphism};
use crate::sheaf::{check_sheaf_equalizer, compatible_families, cover_defects, glue, Gluing};

use super::{extend_along_unit, sheafify_strict, ReflectError};

/// Subsets larger than this are not enumerated exhaustively.
const SUBSET_LIMIT: usize = 16;

fn require_sheaf(f: &Presheaf, cov: &Coverage<ThinCat>, what: &str) -> Result<(), ReflectError> {
    if check_sheaf_equalizer(f, cov)?.is_sheaf() {
        Ok(())
    } else {
        Err(ReflectError::NotASheaf(what.to_string()))
    }
}

fn to_sorted(mask: &[Vec<bool>]) -> Vec<Vec<usize>> {
    mask.iter()
        .map(|m| m.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
        .collect()
}

/// The least subsheaf of the sheaf `f` containing `seed`, closing under
/// restriction and under gluing of compatible families until stable.
pub fn sheaf_closure(
    f: &Arc<Presheaf>,
    cov: &Coverage<ThinCat>,
    seed: &[Vec<usize>],
) -> Result<Vec<Vec<usize>>, ReflectError> {
    let q = f.quantale();
    let n = q.len();
    let mut mask: Vec<Vec<bool>> = f.sets().iter().map(|s| vec![false; s.len()]).collect();
    for (u, xs) in seed.iter().enumerate() {
        for &x in xs {
            mask[u][x] = true;
        }
    }
    loop {
        for u in q.top_down() {
            for x in 0..f.at(u).len() {
                if mask[u][x] {
                    for v in q.down(u) {
                        mask[v][f.restrict(v, u, x)] = true;
                    }
                }
            }
        }
        let keep = to_sorted(&mask);
        let inc = subpresheaf(f, &keep)?;
        let sub = inc.src();
        let mut grew = false;
        for c in cov.all_families() {
            for fam in compatible_families(sub, c) {
                let lifted: Vec<usize> = c.legs.iter().zip(&fam).map(|(m, &x)| keep[m.dom][x]).collect();
                if let Gluing::Unique(g) = glue(f, c, &lifted)? {
                    if !mask[c.target][g] {
                        mask[c.target][g] = true;
                        grew = true;
                    }
                }
            }
        }
        if !grew {
            debug_assert!((0..n).all(|u| keep[u].len() == mask[u].iter().filter(|&&b| b).count()));
            return Ok(keep);
        }
    }
}

/// The subsheaves of a sheaf, ordered by inclusion.
#[derive(Debug, Clone)]
pub struct SubobjectLattice {
    parent: Arc<Presheaf>,
    members: Vec<Vec<Vec<usize>>>,
}

impl SubobjectLattice {
    pub fn parent(&self) -> &Arc<Presheaf> {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Element indices kept at each object.
    pub fn member(&self, i: usize) -> &[Vec<usize>] {
        &self.members[i]
    }

    pub fn members(&self) -> &[Vec<Vec<usize>>] {
        &self.members
    }

    pub fn index_of(&self, keep: &[Vec<usize>]) -> Option<usize> {
        self.members.iter().position(|m| m == keep)
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.members[i]
            .iter()
            .zip(&self.members[j])
            .all(|(a, b)| a.iter().all(|x| b.binary_search(x).is_ok()))
    }

    /// Pointwise intersection.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        let keep: Vec<Vec<usize>> = self.members[i]
            .iter()
            .zip(&self.members[j])
            .map(|(a, b)| a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect())
            .collect();
        self.index_of(&keep)
    }

    /// Least member above both.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let above: Vec<usize> = (0..self.len()).filter(|&k| self.leq(i, k) && self.leq(j, k)).collect();
        above.iter().copied().find(|&k| above.iter().all(|&m| self.leq(k, m)))
    }

    pub fn top(&self) -> usize {
        (0..self.len())
            .find(|&k| (0..self.len()).all(|m| self.leq(m, k)))
            .expect("the sheaf itself is a member")
    }

    pub fn bottom(&self) -> usize {
        (0..self.len())
            .find(|&k| (0..self.len()).all(|m| self.leq(k, m)))
            .expect("subsheaves are closed under meets")
    }

    pub fn inclusion(&self, i: usize) -> PresheafMorphism {
        subpresheaf(&self.parent, &self.members[i]).expect("members are restriction-closed")
    }
}

/// Every subsheaf of the sheaf `f`, enumerated bottom-up with pruning.
pub fn subsheaf_lattice(f: &Arc<Presheaf>, cov: &Coverage<ThinCat>) -> Result<SubobjectLattice, ReflectError> {
    require_sheaf(f, cov, "the ambient presheaf")?;
    let q = f.quantale();
    let n = q.len();
    let mut order = q.top_down();
    order.reverse();
    let hasse = q.hasse_edges();
    let mut members = Vec::new();
    let mut keep: Vec<Vec<usize>> = vec![Vec::new(); n];

    fn go(
        f: &Arc<Presheaf>,
        cov: &Coverage<ThinCat>,
        order: &[usize],
        hasse: &[(usize, usize)],
        depth: usize,
        keep: &mut Vec<Vec<usize>>,
        members: &mut Vec<Vec<Vec<usize>>>,
    ) -> Result<(), ReflectError> {
        if depth == order.len() {
            members.push(keep.clone());
            return Ok(());
        }
        let u = order[depth];
        let allowed: Vec<usize> = (0..f.at(u).len())
            .filter(|&x| {
                hasse
                    .iter()
                    .filter(|&&(_, w)| w == u)
                    .all(|&(v, _)| keep[v].binary_search(&f.restrict(v, u, x)).is_ok())
            })
            .collect();
        if allowed.len() > SUBSET_LIMIT {
            return Err(ReflectError::TooLarge(format!(
                "{} candidate elements at one object",
                allowed.len()
            )));
        }
        for bits in 0u32..(1 << allowed.len()) {
            keep[u] = allowed
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, &x)| x)
                .collect();
            let inc = subpresheaf(f, keep)?;
            if cov.families(&u).iter().all(|c| cover_defects(inc.src(), c).is_empty()) {
                go(f, cov, order, hasse, depth + 1, keep, members)?;
            }
        }
        keep[u].clear();
        Ok(())
    }

    go(f, cov, &order, &hasse, 0, &mut keep, &mut members)?;
    members.sort();
    Ok(SubobjectLattice {
        parent: Arc::clone(f),
        members,
    })
}

/// A morphism of sheaves written as an epimorphism onto its least
/// enclosing subsheaf followed by the inclusion.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub image: Vec<Vec<usize>>,
    pub epi: PresheafMorphism,
    pub mono: PresheafMorphism,
}

pub fn extremal_factorize(phi: &PresheafMorphism, cov: &Coverage<ThinCat>) -> Result<Factorization, ReflectError> {
    let dst = phi.dst();
    require_sheaf(dst, cov, "the codomain")?;
    let seed: Vec<Vec<usize>> = (0..dst.len())
        .map(|u| {
            let image: BTreeSet<usize> = (0..phi.src().at(u).len()).map(|x| phi.apply(u, x)).collect();
            image.into_iter().collect()
        })
        .collect();
    let image = sheaf_closure(dst, cov, &seed)?;
    let mono = subpresheaf(dst, &image)?;
    let sub = Arc::clone(mono.src());
    let comps = (0..dst.len())
        .map(|u| {
            let tab = (0..phi.src().at(u).len())
                .map(|x| image[u].binary_search(&phi.apply(u, x)).expect("image is contained"))
                .collect();
            FinMap::from_table(phi.src().at(u).clone(), sub.at(u).clone(), tab)
        })
        .collect();
    let epi = PresheafMorphism::new(Arc::clone(phi.src()), sub, comps)?;
    Ok(Factorization { image, epi, mono })
}

/// Whether precomposition with `e` is injective on homs into every sheaf
/// of the battery.
pub fn verify_epi(e: &PresheafMorphism, battery: &[Presheaf]) -> Result<bool, ReflectError> {
    for g in battery {
        let g = g.clone().on_site(Arc::clone(e.src().site()))?;
        let homs = HomSearch::new(e.dst(), &g)?.collect_tables();
        let images: BTreeSet<Vec<Vec<usize>>> = homs
            .iter()
            .map(|t| {
                (0..e.src().len())
                    .map(|u| (0..e.src().at(u).len()).map(|x| t[u][e.apply(u, x)]).collect())
                    .collect()
            })
            .collect();
        if images.len() != homs.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `A * B` for subsheaves of `f`: the image of the part of `a(A ★ B)` on
/// which the two maps into `f` agree.
pub fn star(
    f: &Arc<Presheaf>,
    a: &[Vec<usize>],
    b: &[Vec<usize>],
    cov: &Coverage<ThinCat>,
    max_iter: usize,
) -> Result<Vec<Vec<usize>>, ReflectError> {
    let ia = subpresheaf(f, a)?;
    let ib = subpresheaf(f, b)?;
    for (inc, what) in [(&ia, "left"), (&ib, "right")] {
        if !check_sheaf_equalizer(inc.src(), cov)?.is_sheaf() {
            return Err(ReflectError::NotASubsheaf(format!("the {what} factor")));
        }
    }
    let day = day_convolve(ia.src(), ib.src())?;
    let (pi1, pi2) = day_projections(ia.src(), ib.src(), &day)?;
    let r = sheafify_strict(&day.presheaf, cov, max_iter)?;
    let psi0 = extend_along_unit(&r, &ia.after(&pi1)?)?;
    let psi1 = extend_along_unit(&r, &ib.after(&pi2)?)?;
    let e = equalizer(&psi0, &psi1)?;
    let m = psi0.after(&e)?;
    Ok(extremal_factorize(&m, cov)?.image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::canonical_quantale_coverage;
    use crate::presheaf::is_mono;
    use crate::quantale::{build_standard, StandardQuantale};
    use crate::reflect::sheaf_battery;

    fn site(name: StandardQuantale, n: usize) -> Arc<ThinCat> {
        Arc::new(ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap())
    }

    /// The element named by a subterminal: the join of where it is inhabited.
    fn support(q: &crate::quantale::Quantale, keep: &[Vec<usize>]) -> usize {
        q.join_all((0..q.len()).filter(|&u| !keep[u].is_empty()))
    }

    #[test]
    fn subterminals_match_the_quantale() {
        for (name, n) in [
            (StandardQuantale::LukasiewiczChain, 3),
            (StandardQuantale::TruncatedNat, 3),
            (StandardQuantale::PowersetLocale, 2),
            (StandardQuantale::ChainLocale, 3),
        ] {
            let s = site(name, n);
            let q = s.quantale().clone();
            let cov = canonical_quantale_coverage(s.clone()).unwrap();
            let one = Arc::new(Presheaf::terminal(s.clone()));
            let lat = subsheaf_lattice(&one, &cov).unwrap();
            assert_eq!(lat.len(), q.len(), "{name:?}");
            let to_q: Vec<usize> = lat.members().iter().map(|m| support(&q, m)).collect();
            let distinct: BTreeSet<usize> = to_q.iter().copied().collect();
            assert_eq!(distinct.len(), q.len());
            for i in 0..lat.len() {
                for j in 0..lat.len() {
                    assert_eq!(lat.leq(i, j), q.leq(to_q[i], to_q[j]));
                    let st = star(&one, lat.member(i), lat.member(j), &cov, 16).unwrap();
                    assert_eq!(support(&q, &st), q.mul(to_q[i], to_q[j]), "{name:?} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn closure_is_least_enclosing_member() {
        let s = site(StandardQuantale::PowersetLocale, 2);
        let cov = canonical_quantale_coverage(s.clone()).unwrap();
        let battery = sheaf_battery(&cov, 2).unwrap();
        for f in battery.into_iter().filter(|f| f.size() <= 6) {
            let f = Arc::new(f);
            let lat = subsheaf_lattice(&f, &cov).unwrap();
            for i in 0..lat.len() {
                for j in 0..lat.len() {
                    let union: Vec<Vec<usize>> = lat
                        .member(i)
                        .iter()
                        .zip(lat.member(j))
                        .map(|(a, b)| {
                            a.iter()
                                .chain(b)
                                .copied()
                                .collect::<BTreeSet<_>>()
                                .into_iter()
                                .collect()
                        })
                        .collect();
                    let closed = sheaf_closure(&f, &cov, &union).unwrap();
                    assert_eq!(lat.index_of(&closed), lat.join(i, j));
                    assert!(lat.meet(i, j).is_some());
                }
            }
        }
    }

    #[test]
    fn factorization_of_a_point() {
        let s = site(StandardQuantale::LukasiewiczChain, 3);
        let cov = canonical_quantale_coverage(s.clone()).unwrap();
        let one = Arc::new(Presheaf::terminal(s.clone()));
        let yh = Arc::new(Presheaf::yoneda(s.clone(), 1));
        let comps = (0..3).map(|u| FinMap::to_point(yh.at(u), one.at(u))).collect();
        let phi = PresheafMorphism::new(yh, one, comps).unwrap();
        let fact = extremal_factorize(&phi, &cov).unwrap();
        assert_eq!(fact.image, vec![vec![0], vec![0], vec![]]);
        assert!(is_mono(&fact.mono));
        let battery = sheaf_battery(&cov, 2).unwrap();
        assert!(verify_epi(&fact.epi, &battery).unwrap());
        assert_eq!(fact.mono.after(&fact.epi).unwrap(), phi);
    }

    #[test]
    fn empty_sheaf_has_one_subsheaf() {
        let s = site(StandardQuantale::LukasiewiczChain, 3);
        let cov = Coverage::trivial(s.clone());
        let empty = Arc::new(Presheaf::empty(s));
        let lat = subsheaf_lattice(&empty, &cov).unwrap();
        assert_eq!(lat.len(), 1);
        assert_eq!(lat.top(), lat.bottom());
    }

    #[test]
    fn monos_and_epis_factor_trivially() {
        let s = site(StandardQuantale::PowersetLocale, 2);
        let cov = canonical_quantale_coverage(s.clone()).unwrap();
        let battery = sheaf_battery(&cov, 2).unwrap();
        let one = Arc::new(Presheaf::terminal(s.clone()));
        let lat = subsheaf_lattice(&one, &cov).unwrap();
        for i in 0..lat.len() {
            let inc = lat.inclusion(i);
            let fact = extremal_factorize(&inc, &cov).unwrap();
            assert!(crate::presheaf::is_iso(&fact.epi));
            assert_eq!(fact.image, lat.member(i));
        }
        for f in battery.iter().take(6) {
            let f = Arc::new(f.clone());
            let id = PresheafMorphism::identity(f.clone());
            let fact = extremal_factorize(&id, &cov).unwrap();
            assert!(crate::presheaf::is_iso(&fact.mono));
            assert!(verify_epi(&fact.epi, &battery).unwrap());
        }
    }
}
