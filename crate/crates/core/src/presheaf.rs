//! Set-valued presheaves on thin sites: validation, natural transformations,
//! Day convolution and the sieve of a covering family.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coverage::Family;
use crate::finset::{self, tuple_label, FinMap, FinSetError, FinSetObj};
use crate::moncat::{MonoidalCategory, ThinCat};
use crate::quantale::Quantale;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PresheafError {
    #[error("no restriction given or derivable for {v} ≤ {u}")]
    MissingRestriction { v: String, u: String },
    #[error("restriction {v} ≤ {u} given but {v} ≰ {u}")]
    NotBelow { v: String, u: String },
    #[error("restriction to {u} itself is not the identity")]
    NotIdentity { u: String },
    #[error("restrictions do not compose along {w} ≤ {v} ≤ {u} (element {element})")]
    CompositionFails {
        w: String,
        v: String,
        u: String,
        element: String,
    },
    #[error("unknown site object {0}")]
    UnknownObject(String),
    #[error("malformed restriction key {0}; expected \"v<=u\"")]
    BadKey(String),
    #[error("presheaves live on different sites: {0} vs {1}")]
    SiteMismatch(String, String),
    #[error("components are not natural at {v} ≤ {u}")]
    NotNatural { v: String, u: String },
    #[error("{0} is not semicartesian; Day projections need a ≤ 1 for all a")]
    NotSemicartesian(String),
    #[error(transparent)]
    FinSet(#[from] FinSetError),
}

/// A presheaf on a thin site: a finite set at every object and a
/// restriction `F(u) → F(v)` for every `v ≤ u`.
#[derive(Clone)]
pub struct Presheaf {
    site: Arc<ThinCat>,
    at: Vec<FinSetObj>,
    res: Vec<Option<FinMap>>,
}

impl PartialEq for Presheaf {
    fn eq(&self, other: &Self) -> bool {
        same_site(&self.site, &other.site) && self.at == other.at && self.res == other.res
    }
}

impl Eq for Presheaf {}

pub(crate) fn same_site(a: &Arc<ThinCat>, b: &Arc<ThinCat>) -> bool {
    Arc::ptr_eq(a, b) || a.quantale() == b.quantale()
}

impl fmt::Debug for Presheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.quantale();
        let mut m = f.debug_map();
        for u in 0..q.len() {
            m.entry(&q.label(u), &self.at[u]);
        }
        m.finish()
    }
}

impl fmt::Display for Presheaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.quantale();
        for u in q.top_down() {
            writeln!(f, "{:>8}: {}", q.label(u), self.at[u])?;
        }
        Ok(())
    }
}

impl Presheaf {
    /// Builds a presheaf from restrictions along some pairs `v ≤ u`; the rest
    /// are composed along chains, then everything is audited.
    pub fn from_generators(
        site: Arc<ThinCat>,
        at: Vec<FinSetObj>,
        given: BTreeMap<(usize, usize), FinMap>,
    ) -> Result<Self, PresheafError> {
        let q = Arc::clone(site.quantale());
        let n = q.len();
        assert_eq!(at.len(), n, "one set per site object");
        let mut res: Vec<Option<FinMap>> = vec![None; n * n];
        for ((v, u), m) in given {
            if !q.leq(v, u) {
                return Err(PresheafError::NotBelow {
                    v: q.label(v).into(),
                    u: q.label(u).into(),
                });
            }
            if m.dom() != &at[u] || m.cod() != &at[v] {
                return Err(FinSetError::DomainMismatch(format!(
                    "restriction {} ≤ {} must map {} → {}",
                    q.label(v),
                    q.label(u),
                    at[u],
                    at[v]
                ))
                .into());
            }
            res[v * n + u] = Some(m);
        }
        for u in 0..n {
            if res[u * n + u].is_none() {
                res[u * n + u] = Some(FinMap::identity(&at[u]));
            }
            if at[u].is_empty() {
                for v in q.down(u) {
                    res[v * n + u].get_or_insert_with(|| FinMap::from_table(at[u].clone(), at[v].clone(), Vec::new()));
                }
            }
        }
        loop {
            let mut changed = false;
            for u in 0..n {
                for v in 0..n {
                    if !q.leq(v, u) || res[v * n + u].is_some() {
                        continue;
                    }
                    let found = (0..n).find_map(|w| match (&res[v * n + w], &res[w * n + u]) {
                        (Some(a), Some(b)) if q.leq(v, w) && q.leq(w, u) => Some(a.after(b)),
                        _ => None,
                    });
                    if let Some(m) = found {
                        res[v * n + u] = Some(m?);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        for u in 0..n {
            for v in 0..n {
                if q.leq(v, u) && res[v * n + u].is_none() {
                    return Err(PresheafError::MissingRestriction {
                        v: q.label(v).into(),
                        u: q.label(u).into(),
                    });
                }
            }
        }
        let p = Presheaf { site, at, res };
        p.audit()?;
        Ok(p)
    }

    /// Builds a presheaf from a restriction function given on every `v ≤ u`.
    pub fn from_fn(
        site: Arc<ThinCat>,
        at: Vec<FinSetObj>,
        mut restrict: impl FnMut(usize, usize, usize) -> usize,
    ) -> Result<Self, PresheafError> {
        let q = Arc::clone(site.quantale());
        let n = q.len();
        let mut given = BTreeMap::new();
        for u in 0..n {
            for v in 0..n {
                if q.leq(v, u) {
                    let table = (0..at[u].len()).map(|x| restrict(v, u, x)).collect();
                    given.insert((v, u), FinMap::from_indices(at[u].clone(), at[v].clone(), table)?);
                }
            }
        }
        Self::from_generators(site, at, given)
    }

    /// Identity and composition laws, checked exhaustively.
    fn audit(&self) -> Result<(), PresheafError> {
        let q = self.quantale();
        let n = q.len();
        for u in 0..n {
            if self.res(u, u).table().iter().enumerate().any(|(i, &j)| i != j) {
                return Err(PresheafError::NotIdentity { u: q.label(u).into() });
            }
        }
        for u in 0..n {
            for v in q.down(u) {
                for w in q.down(v) {
                    let (wu, wv, vu) = (self.res(w, u), self.res(w, v), self.res(v, u));
                    if let Some(x) = (0..self.at[u].len()).find(|&x| wu.apply(x) != wv.apply(vu.apply(x))) {
                        return Err(PresheafError::CompositionFails {
                            w: q.label(w).into(),
                            v: q.label(v).into(),
                            u: q.label(u).into(),
                            element: self.at[u].label(x).into(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The representable `hom(-, u)`.
    pub fn yoneda(site: Arc<ThinCat>, u: usize) -> Self {
        let q = Arc::clone(site.quantale());
        let at = (0..q.len())
            .map(|w| {
                if q.leq(w, u) {
                    FinSetObj::singleton("*")
                } else {
                    FinSetObj::empty()
                }
            })
            .collect();
        Self::from_fn(site, at, |_, _, _| 0).expect("representables are functorial")
    }

    pub fn terminal(site: Arc<ThinCat>) -> Self {
        let n = site.quantale().len();
        Self::constant(site, FinSetObj::singleton("*"), n)
    }

    pub fn empty(site: Arc<ThinCat>) -> Self {
        let n = site.quantale().len();
        Self::constant(site, FinSetObj::empty(), n)
    }

    /// The same set everywhere with identity restrictions.
    pub fn constant_set(site: Arc<ThinCat>, set: FinSetObj) -> Self {
        let n = site.quantale().len();
        Self::constant(site, set, n)
    }

    fn constant(site: Arc<ThinCat>, set: FinSetObj, n: usize) -> Self {
        Self::from_fn(site, vec![set; n], |_, _, x| x).expect("constant presheaves are functorial")
    }

    pub fn site(&self) -> &Arc<ThinCat> {
        &self.site
    }

    pub fn quantale(&self) -> &Quantale {
        self.site.quantale()
    }

    pub fn len(&self) -> usize {
        self.at.len()
    }

    pub fn is_empty(&self) -> bool {
        self.at.is_empty()
    }

    pub fn at(&self, u: usize) -> &FinSetObj {
        &self.at[u]
    }

    pub fn sets(&self) -> &[FinSetObj] {
        &self.at
    }

    /// The restriction `F(u) → F(v)`; panics unless `v ≤ u`.
    pub fn res(&self, v: usize, u: usize) -> &FinMap {
        self.res[v * self.at.len() + u]
            .as_ref()
            .unwrap_or_else(|| panic!("no restriction {v} ≤ {u}"))
    }

    pub fn restrict(&self, v: usize, u: usize, x: usize) -> usize {
        self.res(v, u).apply(x)
    }

    /// Total number of elements over all objects.
    pub fn size(&self) -> usize {
        self.at.iter().map(FinSetObj::len).sum()
    }

    /// Relabels the site, keeping the data; the sites must agree.
    pub fn on_site(mut self, site: Arc<ThinCat>) -> Result<Self, PresheafError> {
        self.check_site(&site)?;
        self.site = site;
        Ok(self)
    }

    pub(crate) fn check_site(&self, other: &Arc<ThinCat>) -> Result<(), PresheafError> {
        if same_site(&self.site, other) {
            Ok(())
        } else {
            Err(PresheafError::SiteMismatch(self.site.name(), other.name()))
        }
    }

    pub fn from_spec(site: Arc<ThinCat>, spec: &PresheafSpec) -> Result<Self, PresheafError> {
        let q = Arc::clone(site.quantale());
        let find = |l: &str| {
            q.index_of(l.trim())
                .ok_or_else(|| PresheafError::UnknownObject(l.to_string()))
        };
        let mut at = vec![FinSetObj::empty(); q.len()];
        for (u, elems) in &spec.at {
            at[find(u)?] = FinSetObj::new(elems.iter().cloned())?;
        }
        let mut given = BTreeMap::new();
        for (key, table) in &spec.res {
            let (v, u) = key.split_once("<=").ok_or_else(|| PresheafError::BadKey(key.clone()))?;
            let (v, u) = (find(v)?, find(u)?);
            if !q.leq(v, u) {
                return Err(PresheafError::NotBelow {
                    v: q.label(v).into(),
                    u: q.label(u).into(),
                });
            }
            let m = FinMap::new(
                at[u].clone(),
                at[v].clone(),
                table.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            )?;
            given.insert((v, u), m);
        }
        Self::from_generators(site, at, given)
    }

    /// Writes every set and every restriction along a Hasse edge.
    pub fn to_spec(&self) -> PresheafSpec {
        let q = self.quantale();
        let at = (0..q.len())
            .map(|u| (q.label(u).to_string(), self.at[u].labels().to_vec()))
            .collect();
        let res = q
            .hasse_edges()
            .into_iter()
            .filter(|&(_, u)| !self.at[u].is_empty())
            .map(|(v, u)| {
                let m = self.res(v, u);
                let table = (0..self.at[u].len())
                    .map(|x| {
                        (
                            self.at[u].label(x).to_string(),
                            self.at[v].label(m.apply(x)).to_string(),
                        )
                    })
                    .collect();
                (format!("{}<={}", q.label(v), q.label(u)), table)
            })
            .collect();
        PresheafSpec { at, res }
    }
}

/// The JSON form of a presheaf.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafSpec {
    pub at: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub res: BTreeMap<String, BTreeMap<String, String>>,
}

/// A natural transformation between presheaves on the same site.
#[derive(Clone, PartialEq, Eq)]
pub struct PresheafMorphism {
    src: Arc<Presheaf>,
    dst: Arc<Presheaf>,
    comps: Vec<FinMap>,
}

impl fmt::Debug for PresheafMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.src.quantale();
        let mut m = f.debug_map();
        for (u, c) in self.comps.iter().enumerate() {
            m.entry(&q.label(u), c);
        }
        m.finish()
    }
}

impl PresheafMorphism {
    /// Checks naturality along every Hasse edge.
    pub fn new(src: Arc<Presheaf>, dst: Arc<Presheaf>, comps: Vec<FinMap>) -> Result<Self, PresheafError> {
        src.check_site(dst.site())?;
        let q = src.quantale();
        for (u, c) in comps.iter().enumerate() {
            if c.dom() != src.at(u) || c.cod() != dst.at(u) {
                return Err(FinSetError::DomainMismatch(format!("component at {}", q.label(u))).into());
            }
        }
        for (v, u) in q.hasse_edges() {
            let ok = (0..src.at(u).len())
                .all(|x| dst.restrict(v, u, comps[u].apply(x)) == comps[v].apply(src.restrict(v, u, x)));
            if !ok {
                return Err(PresheafError::NotNatural {
                    v: q.label(v).into(),
                    u: q.label(u).into(),
                });
            }
        }
        Ok(PresheafMorphism { src, dst, comps })
    }

    /// The unique morphism into the terminal presheaf.
    pub fn to_terminal(src: Arc<Presheaf>) -> Self {
        let one = Arc::new(Presheaf::terminal(Arc::clone(src.site())));
        let comps = (0..src.len()).map(|u| FinMap::to_point(src.at(u), one.at(u))).collect();
        PresheafMorphism { src, dst: one, comps }
    }

    pub(crate) fn from_tables(src: Arc<Presheaf>, dst: Arc<Presheaf>, tables: Vec<Vec<usize>>) -> Self {
        let comps = tables
            .into_iter()
            .enumerate()
            .map(|(u, t)| FinMap::from_table(src.at(u).clone(), dst.at(u).clone(), t))
            .collect();
        PresheafMorphism { src, dst, comps }
    }

    pub fn identity(p: Arc<Presheaf>) -> Self {
        let comps = p.sets().iter().map(FinMap::identity).collect();
        PresheafMorphism {
            src: Arc::clone(&p),
            dst: p,
            comps,
        }
    }

    pub fn src(&self) -> &Arc<Presheaf> {
        &self.src
    }

    pub fn dst(&self) -> &Arc<Presheaf> {
        &self.dst
    }

    pub fn component(&self, u: usize) -> &FinMap {
        &self.comps[u]
    }

    pub fn components(&self) -> &[FinMap] {
        &self.comps
    }

    pub fn apply(&self, u: usize, x: usize) -> usize {
        self.comps[u].apply(x)
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &PresheafMorphism) -> Result<PresheafMorphism, PresheafError> {
        if *first.dst != *self.src {
            return Err(FinSetError::DomainMismatch("composite of non-composable morphisms".into()).into());
        }
        let comps = self
            .comps
            .iter()
            .zip(&first.comps)
            .map(|(g, f)| g.after(f))
            .collect::<Result<_, _>>()?;
        Ok(PresheafMorphism {
            src: Arc::clone(&first.src),
            dst: Arc::clone(&self.dst),
            comps,
        })
    }

    /// Same components, retargeted at an equal presheaf.
    pub fn with_ends(&self, src: Arc<Presheaf>, dst: Arc<Presheaf>) -> Self {
        debug_assert!(*src == *self.src && *dst == *self.dst);
        PresheafMorphism {
            src,
            dst,
            comps: self.comps.clone(),
        }
    }
}

/// Pointwise injectivity, which characterizes monomorphisms of presheaves.
pub fn is_mono(m: &PresheafMorphism) -> bool {
    m.comps.iter().all(FinMap::is_injective)
}

pub fn is_epi(m: &PresheafMorphism) -> bool {
    m.comps.iter().all(FinMap::is_surjective)
}

pub fn is_iso(m: &PresheafMorphism) -> bool {
    m.comps.iter().all(FinMap::is_bijective)
}

/// Per object, the colour of each element.
type Colouring = Vec<Vec<usize>>;
/// Own colour plus the colours seen along lower and upper edges.
type ColourKey = (usize, Vec<(usize, usize)>, Vec<(usize, usize)>);

/// Backtracking search for natural transformations `F → G`.
///
/// Objects are visited from the top down, so each element's image is forced
/// whenever it is a restriction of an element already assigned; images are
/// also checked against restrictions already assigned below.
pub struct HomSearch<'a> {
    f: &'a Presheaf,
    g: &'a Presheaf,
    order: Vec<usize>,
    /// For each object and element of `F`, one preimage along each upper Hasse edge.
    above: Vec<Vec<Vec<(usize, usize)>>>,
    /// Lower Hasse covers of each object.
    lower: Vec<Vec<usize>>,
    injective: bool,
    fixed: Option<&'a [Vec<Option<usize>>]>,
    /// Elements may only map to elements of the same colour.
    colours: Option<(Colouring, Colouring)>,
}

impl<'a> HomSearch<'a> {
    pub fn new(f: &'a Presheaf, g: &'a Presheaf) -> Result<Self, PresheafError> {
        f.check_site(g.site())?;
        let q = f.quantale();
        let n = q.len();
        let mut above: Vec<Vec<Vec<(usize, usize)>>> = (0..n).map(|u| vec![Vec::new(); f.at(u).len()]).collect();
        for (v, u) in q.hasse_edges() {
            for z in 0..f.at(u).len() {
                above[v][f.restrict(v, u, z)].push((u, z));
            }
        }
        let mut lower = vec![Vec::new(); n];
        for (v, u) in q.hasse_edges() {
            lower[u].push(v);
        }
        Ok(HomSearch {
            f,
            g,
            order: q.top_down(),
            above,
            lower,
            injective: false,
            fixed: None,
            colours: None,
        })
    }

    /// Only pointwise injective transformations.
    pub fn injective(mut self) -> Self {
        self.injective = true;
        self
    }

    /// Pins some images in advance: `fixed[u][x] = Some(y)`.
    pub fn fixed(mut self, fixed: &'a [Vec<Option<usize>>]) -> Self {
        self.fixed = Some(fixed);
        self
    }

    /// Calls `visit` on each transformation's tables until it breaks.
    pub fn run(&self, mut visit: impl FnMut(&[Vec<usize>]) -> ControlFlow<()>) {
        let mut assign: Vec<Vec<usize>> = self.f.sets().iter().map(|s| vec![usize::MAX; s.len()]).collect();
        let mut used: Vec<Vec<bool>> = self.g.sets().iter().map(|s| vec![false; s.len()]).collect();
        if self.injective && self.f.sets().iter().zip(self.g.sets()).any(|(a, b)| a.len() > b.len()) {
            return;
        }
        let _ = self.step(0, 0, &mut assign, &mut used, &mut visit);
    }

    fn step(
        &self,
        k: usize,
        x: usize,
        assign: &mut Vec<Vec<usize>>,
        used: &mut Vec<Vec<bool>>,
        visit: &mut impl FnMut(&[Vec<usize>]) -> ControlFlow<()>,
    ) -> ControlFlow<()> {
        if k == self.order.len() {
            return visit(assign);
        }
        let u = self.order[k];
        if x == self.f.at(u).len() {
            return self.step(k + 1, 0, assign, used, visit);
        }
        let mut forced: Option<usize> = None;
        for &(w, z) in &self.above[u][x] {
            if assign[w][z] == usize::MAX {
                continue;
            }
            let y = self.g.restrict(u, w, assign[w][z]);
            match forced {
                Some(prev) if prev != y => return ControlFlow::Continue(()),
                _ => forced = Some(y),
            }
        }
        if let Some(Some(y)) = self.fixed.and_then(|f| f.get(u)).and_then(|row| row.get(x)) {
            match forced {
                Some(prev) if prev != *y => return ControlFlow::Continue(()),
                _ => forced = Some(*y),
            }
        }
        let candidates: Vec<usize> = match forced {
            Some(y) => vec![y],
            None => (0..self.g.at(u).len()).collect(),
        };
        for y in candidates {
            if self.injective && used[u][y] {
                continue;
            }
            if let Some((cf, cg)) = &self.colours {
                if cf[u][x] != cg[u][y] {
                    continue;
                }
            }
            let clash = self.lower[u].iter().any(|&v| {
                let below = assign[v][self.f.restrict(v, u, x)];
                below != usize::MAX && below != self.g.restrict(v, u, y)
            });
            if clash {
                continue;
            }
            assign[u][x] = y;
            used[u][y] = true;
            let flow = self.step(k, x + 1, assign, used, visit);
            used[u][y] = false;
            flow?;
        }
        assign[u][x] = usize::MAX;
        ControlFlow::Continue(())
    }

    pub fn count(&self) -> usize {
        let mut n = 0;
        self.run(|_| {
            n += 1;
            ControlFlow::Continue(())
        });
        n
    }

    pub fn first(&self) -> Option<Vec<Vec<usize>>> {
        let mut out = None;
        self.run(|t| {
            out = Some(t.to_vec());
            ControlFlow::Break(())
        });
        out
    }

    pub fn collect_tables(&self) -> Vec<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        self.run(|t| {
            out.push(t.to_vec());
            ControlFlow::Continue(())
        });
        out
    }
}

/// Every natural transformation `F → G`.
pub fn hom_presheaves(f: &Arc<Presheaf>, g: &Arc<Presheaf>) -> Result<Vec<PresheafMorphism>, PresheafError> {
    let tables = HomSearch::new(f, g)?.collect_tables();
    Ok(tables
        .into_iter()
        .map(|t| PresheafMorphism::from_tables(Arc::clone(f), Arc::clone(g), t))
        .collect())
}

/// An isomorphism `F → G`, if one exists.
pub fn find_isomorphism(f: &Arc<Presheaf>, g: &Arc<Presheaf>) -> Option<PresheafMorphism> {
    if f.check_site(g.site()).is_err() || f.sets().iter().zip(g.sets()).any(|(a, b)| a.len() != b.len()) {
        return None;
    }
    let (cf, cg) = refine_colours(f, g);
    for u in 0..f.len() {
        let mut a = cf[u].clone();
        let mut b = cg[u].clone();
        a.sort_unstable();
        b.sort_unstable();
        if a != b {
            return None;
        }
    }
    let mut search = HomSearch::new(f, g).ok()?.injective();
    search.colours = Some((cf, cg));
    // bottom-up: an element above is then pinned down by its restrictions
    search.order.reverse();
    let t = search.first()?;
    Some(PresheafMorphism::from_tables(Arc::clone(f), Arc::clone(g), t))
}

/// Colour refinement on elements of two presheaves at once: an element's
/// colour records its object, the colours of its restrictions along lower
/// Hasse edges and the multiset of colours of its preimages along upper
/// ones, iterated until stable. Isomorphisms preserve colours.
fn refine_colours(f: &Presheaf, g: &Presheaf) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let q = f.quantale();
    let n = q.len();
    let hasse = q.hasse_edges();
    let sides = [f, g];
    let mut colours: Vec<Vec<Vec<usize>>> = sides
        .iter()
        .map(|p| (0..n).map(|u| vec![u; p.at(u).len()]).collect())
        .collect();
    let mut classes = n;
    loop {
        let mut keys: BTreeMap<ColourKey, usize> = BTreeMap::new();
        let mut raw: Vec<Vec<Vec<ColourKey>>> = Vec::new();
        for (side, p) in sides.iter().enumerate() {
            let c = &colours[side];
            let mut per: Vec<Vec<_>> = (0..n)
                .map(|u| vec![(0, Vec::new(), Vec::new()); p.at(u).len()])
                .collect();
            for u in 0..n {
                for (x, slot) in per[u].iter_mut().enumerate() {
                    slot.0 = c[u][x];
                }
            }
            for &(v, u) in &hasse {
                for x in 0..p.at(u).len() {
                    let y = p.restrict(v, u, x);
                    per[u][x].1.push((v, c[v][y]));
                    per[v][y].2.push((u, c[u][x]));
                }
            }
            for row in per.iter_mut() {
                for key in row.iter_mut() {
                    key.1.sort_unstable();
                    key.2.sort_unstable();
                }
            }
            raw.push(per);
        }
        for per in &raw {
            for row in per {
                for key in row {
                    let next = keys.len();
                    keys.entry(key.clone()).or_insert(next);
                }
            }
        }
        let next: Vec<Vec<Vec<usize>>> = raw
            .iter()
            .map(|per| per.iter().map(|row| row.iter().map(|k| keys[k]).collect()).collect())
            .collect();
        colours = next;
        if keys.len() == classes {
            break;
        }
        classes = keys.len();
    }
    let g_colours = colours.pop().expect("two sides");
    let f_colours = colours.pop().expect("two sides");
    (f_colours, g_colours)
}

pub fn isomorphic(f: &Presheaf, g: &Presheaf) -> bool {
    find_isomorphism(&Arc::new(f.clone()), &Arc::new(g.clone())).is_some()
}

/// `F ★ G` together with a representative `(v, w, x, y)` of each class.
#[derive(Debug, Clone)]
pub struct DayConvolution {
    pub presheaf: Arc<Presheaf>,
    reps: Vec<Vec<(usize, usize, usize, usize)>>,
    index: Vec<HashMap<(usize, usize, usize, usize), usize>>,
}

impl DayConvolution {
    /// The class of `(v, w, x, y)` at `u`; requires `u ≤ v ⊙ w`.
    pub fn class(&self, u: usize, v: usize, w: usize, x: usize, y: usize) -> Option<usize> {
        self.index[u].get(&(v, w, x, y)).copied()
    }

    pub fn representative(&self, u: usize, k: usize) -> (usize, usize, usize, usize) {
        self.reps[u][k]
    }
}

/// The Day convolution on a thin site, as a quotient of factorizations `u ≤ v ⊙ w`.
pub fn day_convolve(f: &Presheaf, g: &Presheaf) -> Result<DayConvolution, PresheafError> {
    f.check_site(g.site())?;
    let q = f.quantale();
    let n = q.len();
    let hasse = q.hasse_edges();
    let mut below: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(v, u) in &hasse {
        below[u].push(v);
    }
    let mut at = Vec::with_capacity(n);
    let mut all_reps = Vec::with_capacity(n);
    let mut all_index = Vec::with_capacity(n);
    for u in 0..n {
        let mut tuples = Vec::new();
        for v in 0..n {
            for w in 0..n {
                if q.leq(u, q.mul(v, w)) {
                    for x in 0..f.at(v).len() {
                        for y in 0..g.at(w).len() {
                            tuples.push((v, w, x, y));
                        }
                    }
                }
            }
        }
        let labels: Vec<String> = tuples
            .iter()
            .map(|&(v, w, x, y)| tuple_label(&[q.label(v), q.label(w), f.at(v).label(x), g.at(w).label(y)]))
            .collect();
        let set = FinSetObj::from_generated(labels.clone());
        let pos: Vec<usize> = labels.iter().map(|l| set.index_of(l).expect("label present")).collect();
        let lookup: HashMap<(usize, usize, usize, usize), usize> =
            tuples.iter().enumerate().map(|(k, &t)| (t, k)).collect();
        let mut pairs = Vec::new();
        for (k, &(v, w, x, y)) in tuples.iter().enumerate() {
            for &v2 in &below[v] {
                if q.leq(u, q.mul(v2, w)) {
                    let t = (v2, w, f.restrict(v2, v, x), y);
                    pairs.push((pos[k], pos[lookup[&t]]));
                }
            }
            for &w2 in &below[w] {
                if q.leq(u, q.mul(v, w2)) {
                    let t = (v, w2, x, g.restrict(w2, w, y));
                    pairs.push((pos[k], pos[lookup[&t]]));
                }
            }
        }
        let (obj, proj) = finset::quotient(&set, pairs);
        let mut reps = vec![None; obj.len()];
        let mut index = HashMap::with_capacity(tuples.len());
        for (k, &t) in tuples.iter().enumerate() {
            let c = proj.apply(pos[k]);
            index.insert(t, c);
            // the class label is its least member, so that member is the representative
            if obj.label(c) == set.label(pos[k]) {
                reps[c] = Some(t);
            }
        }
        at.push(obj);
        all_reps.push(
            reps.into_iter()
                .map(|r| r.expect("every class has a least member"))
                .collect::<Vec<_>>(),
        );
        all_index.push(index);
    }
    let site = Arc::clone(f.site());
    let presheaf = Presheaf::from_fn(site, at, |u2, u, k| {
        let (v, w, x, y) = all_reps[u][k];
        all_index[u2][&(v, w, x, y)]
    })?;
    Ok(DayConvolution {
        presheaf: Arc::new(presheaf),
        reps: all_reps,
        index: all_index,
    })
}

/// The projections `F ★ G → F` and `F ★ G → G` of a semicartesian site.
pub fn day_projections(
    f: &Arc<Presheaf>,
    g: &Arc<Presheaf>,
    day: &DayConvolution,
) -> Result<(PresheafMorphism, PresheafMorphism), PresheafError> {
    let q = f.quantale();
    if !q.classify().semicartesian {
        return Err(PresheafError::NotSemicartesian(q.name().into()));
    }
    let n = q.len();
    let mut t1 = Vec::with_capacity(n);
    let mut t2 = Vec::with_capacity(n);
    for u in 0..n {
        let (a, b): (Vec<usize>, Vec<usize>) = day.reps[u]
            .iter()
            .map(|&(v, w, x, y)| (f.restrict(u, v, x), g.restrict(u, w, y)))
            .unzip();
        t1.push(a);
        t2.push(b);
    }
    let p = Arc::clone(&day.presheaf);
    Ok((
        PresheafMorphism::new(Arc::clone(&p), Arc::clone(f), tables_to_maps(&p, f, t1))?,
        PresheafMorphism::new(p.clone(), Arc::clone(g), tables_to_maps(&p, g, t2))?,
    ))
}

fn tables_to_maps(src: &Presheaf, dst: &Presheaf, tables: Vec<Vec<usize>>) -> Vec<FinMap> {
    tables
        .into_iter()
        .enumerate()
        .map(|(u, t)| FinMap::from_table(src.at(u).clone(), dst.at(u).clone(), t))
        .collect()
}

/// The subpresheaf of `F` where two parallel morphisms agree, with its inclusion.
pub fn equalizer(a: &PresheafMorphism, b: &PresheafMorphism) -> Result<PresheafMorphism, PresheafError> {
    if a.src != b.src || a.dst != b.dst {
        return Err(FinSetError::DomainMismatch("equalizer of non-parallel morphisms".into()).into());
    }
    let src = a.src();
    let keep: Vec<Vec<usize>> = (0..src.len())
        .map(|u| {
            (0..src.at(u).len())
                .filter(|&x| a.apply(u, x) == b.apply(u, x))
                .collect()
        })
        .collect();
    subpresheaf(src, &keep)
}

/// The subpresheaf on the given (restriction-closed) element indices, with its inclusion.
pub fn subpresheaf(p: &Arc<Presheaf>, keep: &[Vec<usize>]) -> Result<PresheafMorphism, PresheafError> {
    let sets: Vec<(FinSetObj, FinMap)> = keep
        .iter()
        .enumerate()
        .map(|(u, k)| finset::subset(p.at(u), k))
        .collect();
    let at: Vec<FinSetObj> = sets.iter().map(|(s, _)| s.clone()).collect();
    let sub = Presheaf::from_fn(Arc::clone(p.site()), at, |v, u, i| {
        let y = p.restrict(v, u, keep[u][i]);
        keep[v]
            .binary_search(&y)
            .expect("kept elements are closed under restriction")
    })?;
    let comps = sets.into_iter().map(|(_, incl)| incl).collect();
    PresheafMorphism::new(Arc::new(sub), Arc::clone(p), comps)
}

/// The pseudo-pullback of `a: F → H` and `b: G → H`: the equalizer of
/// `a∘π1` and `b∘π2` on `F ★ G`.
pub struct PshPseudoPullback {
    pub day: DayConvolution,
    pub e: PresheafMorphism,
    pub p1: PresheafMorphism,
    pub p2: PresheafMorphism,
}

pub fn psh_pseudo_pullback(a: &PresheafMorphism, b: &PresheafMorphism) -> Result<PshPseudoPullback, PresheafError> {
    if a.dst != b.dst {
        return Err(FinSetError::CodomainMismatch("pseudo-pullback of a cospan needs a shared codomain".into()).into());
    }
    let day = day_convolve(a.src(), b.src())?;
    let (pi1, pi2) = day_projections(a.src(), b.src(), &day)?;
    let e = equalizer(&a.after(&pi1)?, &b.after(&pi2)?)?;
    let p1 = pi1.after(&e)?;
    let p2 = pi2.after(&e)?;
    Ok(PshPseudoPullback { day, e, p1, p2 })
}

/// The sieve of a covering family and its canonical morphism into `y(U)`.
#[derive(Debug, Clone)]
pub struct Sieve {
    pub cover: Family<ThinCat>,
    pub presheaf: Arc<Presheaf>,
    pub canonical: PresheafMorphism,
    /// The coprojections `y(U_i) → S`.
    pub legs: Vec<PresheafMorphism>,
}

/// `S(w) = {i : w ≤ u_i} / (i ~ j iff w ≤ u_i ⊙ u_j)`, the coequalizer of
/// the pseudo-pullback legs, using `y(u_i) ★' y(u_j) ≅ y(u_i ⊙ u_j)`.
pub fn sieve_of(site: &Arc<ThinCat>, cover: &Family<ThinCat>) -> Result<Sieve, PresheafError> {
    let q = site.quantale();
    let n = q.len();
    let doms: Vec<usize> = cover.legs.iter().map(|m| m.dom).collect();
    let width = doms.len().to_string().len();
    let tag = |i: usize| format!("{i:0width$}");
    let mut at = Vec::with_capacity(n);
    let mut class_of: Vec<Vec<Option<usize>>> = Vec::with_capacity(n);
    for w in 0..n {
        let members: Vec<usize> = (0..doms.len()).filter(|&i| q.leq(w, doms[i])).collect();
        let set = FinSetObj::from_generated(members.iter().map(|&i| tag(i)).collect());
        let mut pairs = Vec::new();
        for (a, &i) in members.iter().enumerate() {
            for (b, &j) in members.iter().enumerate().skip(a + 1) {
                if q.leq(w, q.mul(doms[i], doms[j])) {
                    pairs.push((a, b));
                }
            }
        }
        let (obj, proj) = finset::quotient(&set, pairs);
        let mut row = vec![None; doms.len()];
        for (a, &i) in members.iter().enumerate() {
            row[i] = Some(proj.apply(a));
        }
        at.push(obj);
        class_of.push(row);
    }
    let s = Presheaf::from_fn(Arc::clone(site), at, |v, w, k| {
        // any member of the class at w is a member at v
        let i = class_of[w]
            .iter()
            .position(|c| *c == Some(k))
            .expect("class has a member");
        class_of[v][i].expect("membership is downward closed")
    })?;
    let s = Arc::new(s);
    let y = Arc::new(Presheaf::yoneda(Arc::clone(site), cover.target));
    let canonical = PresheafMorphism::new(
        Arc::clone(&s),
        Arc::clone(&y),
        (0..n)
            .map(|w| FinMap::from_table(s.at(w).clone(), y.at(w).clone(), vec![0; s.at(w).len()]))
            .collect(),
    )?;
    let legs = doms
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let yi = Arc::new(Presheaf::yoneda(Arc::clone(site), d));
            let comps = (0..n)
                .map(|w| {
                    let t = if q.leq(w, d) {
                        vec![class_of[w][i].expect("w ≤ u_i")]
                    } else {
                        Vec::new()
                    };
                    FinMap::from_table(yi.at(w).clone(), s.at(w).clone(), t)
                })
                .collect();
            PresheafMorphism::new(yi, Arc::clone(&s), comps)
        })
        .collect::<Result<_, _>>()?;
    Ok(Sieve {
        cover: cover.clone(),
        presheaf: s,
        canonical,
        legs,
    })
}

/// The sieve computed literally: pseudo-pullbacks of representables in
/// presheaves, their coproduct, and the pointwise coequalizer.
pub fn sieve_of_literal(site: &Arc<ThinCat>, cover: &Family<ThinCat>) -> Result<Arc<Presheaf>, PresheafError> {
    let n = site.quantale().len();
    let y_u = Arc::new(Presheaf::yoneda(Arc::clone(site), cover.target));
    let reps: Vec<Arc<Presheaf>> = cover
        .legs
        .iter()
        .map(|m| Arc::new(Presheaf::yoneda(Arc::clone(site), m.dom)))
        .collect();
    let into_u: Vec<PresheafMorphism> = reps
        .iter()
        .map(|r| {
            let comps = (0..n)
                .map(|w| FinMap::from_table(r.at(w).clone(), y_u.at(w).clone(), vec![0; r.at(w).len()]))
                .collect();
            PresheafMorphism::new(Arc::clone(r), Arc::clone(&y_u), comps)
        })
        .collect::<Result<_, _>>()?;
    let mut pps = Vec::new();
    for (i, a) in into_u.iter().enumerate() {
        for (j, b) in into_u.iter().enumerate() {
            pps.push((i, j, psh_pseudo_pullback(a, b)?));
        }
    }
    let mut at = Vec::with_capacity(n);
    let mut maps: Vec<FinMap> = Vec::with_capacity(n);
    let coprod_at = |w: usize| finset::coproduct(&reps.iter().map(|r| r.at(w).clone()).collect::<Vec<_>>());
    for w in 0..n {
        let target = coprod_at(w);
        let sources: Vec<FinSetObj> = pps.iter().map(|(_, _, pp)| pp.e.src().at(w).clone()).collect();
        let src = finset::coproduct(&sources);
        let mut left = Vec::with_capacity(src.obj.len());
        let mut right = Vec::with_capacity(src.obj.len());
        for k in 0..src.obj.len() {
            let (which, x) = src.locate(k);
            let (i, j, pp) = &pps[which];
            left.push(target.injections[*i].apply(pp.p1.apply(w, x)));
            right.push(target.injections[*j].apply(pp.p2.apply(w, x)));
        }
        let l = FinMap::from_table(src.obj.clone(), target.obj.clone(), left);
        let r = FinMap::from_table(src.obj, target.obj.clone(), right);
        let (obj, proj) = finset::coequalizer(&l, &r)?;
        at.push(obj);
        maps.push(proj);
    }
    let s = Presheaf::from_fn(Arc::clone(site), at, |v, w, k| {
        let src = coprod_at(w);
        let dst = coprod_at(v);
        let pre = (0..src.obj.len())
            .find(|&e| maps[w].apply(e) == k)
            .expect("quotient maps are onto");
        let (i, x) = src.locate(pre);
        maps[v].apply(dst.injections[i].apply(reps[i].restrict(v, w, x)))
    })?;
    Ok(Arc::new(s))
}
