//! Exhaustive enumeration of small presheaves, bottom-up.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::coverage::Coverage;
use crate::finset::{FinMap, FinSetObj};
use crate::moncat::ThinCat;
use crate::presheaf::Presheaf;
use crate::sheaf::cover_defects;

use super::ReflectError;

/// Enumeration gives up past this many results.
const ENUMERATION_LIMIT: usize = 200_000;

struct Enumerator<'a> {
    site: Arc<ThinCat>,
    order: Vec<usize>,
    lower: Vec<Vec<usize>>,
    bound: usize,
    accept: &'a dyn Fn(&Presheaf, usize) -> bool,
    sizes: Vec<usize>,
    /// `maps[u][k]` is the restriction from `u` to its `k`-th lower cover.
    maps: Vec<Vec<Vec<usize>>>,
    out: Vec<Presheaf>,
    overflow: bool,
}

impl Enumerator<'_> {
    fn build(&self, assigned: usize) -> Presheaf {
        let q = self.site.quantale();
        let n = q.len();
        let mut at: Vec<FinSetObj> = vec![FinSetObj::empty(); n];
        for &u in &self.order[..assigned] {
            at[u] = FinSetObj::range(self.sizes[u]);
        }
        let mut gens = BTreeMap::new();
        for &u in &self.order[..assigned] {
            for (k, &v) in self.lower[u].iter().enumerate() {
                let tab = self.maps[u][k].clone();
                gens.insert((v, u), FinMap::from_table(at[u].clone(), at[v].clone(), tab));
            }
        }
        Presheaf::from_generators(Arc::clone(&self.site), at, gens).expect("enumerated data is functorial")
    }

    /// Profiles for a new element of `u`: one image per lower cover, agreeing
    /// on every common lower bound.
    fn profiles(&self, partial: &Presheaf, u: usize) -> Vec<Vec<usize>> {
        let q = self.site.quantale();
        let lower = &self.lower[u];
        let mut out = vec![Vec::new()];
        for (k, &v) in lower.iter().enumerate() {
            let mut next = Vec::new();
            for prefix in &out {
                'y: for y in 0..self.sizes[v] {
                    for (j, &v2) in lower[..k].iter().enumerate() {
                        for w in 0..q.len() {
                            if q.leq(w, v)
                                && q.leq(w, v2)
                                && partial.restrict(w, v, y) != partial.restrict(w, v2, prefix[j])
                            {
                                continue 'y;
                            }
                        }
                    }
                    let mut p = prefix.clone();
                    p.push(y);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    fn go(&mut self, depth: usize) {
        if self.overflow {
            return;
        }
        if depth == self.order.len() {
            if self.out.len() >= ENUMERATION_LIMIT {
                self.overflow = true;
                return;
            }
            let p = self.build(depth);
            self.out.push(p);
            return;
        }
        let u = self.order[depth];
        let partial = self.build(depth);
        let profiles = self.profiles(&partial, u);
        for s in 0..=self.bound {
            // nondecreasing choice of profiles, one per element
            let mut idx = vec![0usize; s];
            loop {
                if s > 0 && profiles.is_empty() {
                    break;
                }
                self.sizes[u] = s;
                self.maps[u] = (0..self.lower[u].len())
                    .map(|k| idx.iter().map(|&i| profiles[i][k]).collect())
                    .collect();
                if (self.accept)(&self.build(depth + 1), u) {
                    self.go(depth + 1);
                }
                // advance to the next nondecreasing sequence
                let mut pos = s;
                while pos > 0 && idx[pos - 1] + 1 == profiles.len() {
                    pos -= 1;
                }
                if pos == 0 {
                    break;
                }
                idx[pos - 1] += 1;
                let v = idx[pos - 1];
                for slot in &mut idx[pos..] {
                    *slot = v;
                }
            }
        }
        self.sizes[u] = 0;
        self.maps[u].clear();
    }
}

/// Every presheaf with all value sets of size at most `bound`, up to
/// relabelling elements in profile order. Objects are filled bottom-up and
/// `accept(partial, u)` prunes after `u` is filled; unfilled objects are empty.
pub fn enumerate_presheaves(
    site: &Arc<ThinCat>,
    bound: usize,
    accept: &dyn Fn(&Presheaf, usize) -> bool,
) -> Result<Vec<Presheaf>, ReflectError> {
    let q = site.quantale();
    let n = q.len();
    let mut order = q.top_down();
    order.reverse();
    let hasse = q.hasse_edges();
    let lower = (0..n)
        .map(|u| hasse.iter().filter(|&&(_, w)| w == u).map(|&(v, _)| v).collect())
        .collect();
    let mut e = Enumerator {
        site: Arc::clone(site),
        order,
        lower,
        bound,
        accept,
        sizes: vec![0; n],
        maps: vec![Vec::new(); n],
        out: Vec::new(),
        overflow: false,
    };
    e.go(0);
    if e.overflow {
        return Err(ReflectError::TooLarge(format!(
            "more than {ENUMERATION_LIMIT} presheaves with values of size at most {bound}"
        )));
    }
    Ok(e.out)
}

/// All sheaves for `cov` with value sets of size at most `bound`.
pub fn sheaf_battery(cov: &Coverage<ThinCat>, bound: usize) -> Result<Vec<Presheaf>, ReflectError> {
    let accept = |p: &Presheaf, u: usize| cov.families(&u).iter().all(|c| cover_defects(p, c).is_empty());
    enumerate_presheaves(cov.site(), bound, &accept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coverage::canonical_quantale_coverage;
    use crate::presheaf::isomorphic;
    use crate::quantale::{build_standard, StandardQuantale};
    use crate::sheaf::check_sheaf_equalizer;

    fn site(name: StandardQuantale, n: usize) -> Arc<ThinCat> {
        Arc::new(ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap())
    }

    #[test]
    fn chain_presheaves_counted() {
        // sizes (0,0), (1,0), (1,1); a nonempty top needs a nonempty bottom
        let s = site(StandardQuantale::ChainLocale, 2);
        let all = enumerate_presheaves(&s, 1, &|_, _| true).unwrap();
        assert_eq!(all.len(), 3);
        // bottom of size 0, 1, 2 contributes 1, 3 and 6 choices for the top
        let all = enumerate_presheaves(&s, 2, &|_, _| true).unwrap();
        assert_eq!(all.len(), 10);
    }

    #[test]
    fn batteries_are_sheaves_and_distinct_shapes_appear() {
        for (name, n) in [
            (StandardQuantale::LukasiewiczChain, 3),
            (StandardQuantale::PowersetLocale, 2),
            (StandardQuantale::TruncatedNat, 3),
        ] {
            let s = site(name, n);
            let cov = canonical_quantale_coverage(s.clone()).unwrap();
            let battery = sheaf_battery(&cov, 2).unwrap();
            assert!(battery
                .iter()
                .all(|f| check_sheaf_equalizer(f, &cov).unwrap().is_sheaf()));
            let t = Presheaf::terminal(s.clone());
            assert!(battery.iter().any(|f| isomorphic(f, &t)));
            let all = enumerate_presheaves(&s, 2, &|_, _| true).unwrap();
            let sheaves = all
                .iter()
                .filter(|f| check_sheaf_equalizer(f, &cov).unwrap().is_sheaf())
                .count();
            assert_eq!(sheaves, battery.len(), "{name:?}");
        }
    }
}
