//! Coverages on monoidal sites and exhaustive checkers for their axioms.
//!
//! Families are indexed lists, so `{h, h}` and `{h}` are different families.
//! Membership is decided from the set of distinct legs (the support); the
//! enumerated families of a coverage repeat each leg at most `cap` times.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moncat::{exists_l_r_factorizations, pseudo_pullback, MonCatError, MonoidalCategory, ThinCat, ThinMor};

/// Default bound on how often one leg is repeated in an enumerated family.
pub const DEFAULT_MULTIPLICITY: usize = 2;

const WITNESS_CAP: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverageError {
    #[error("{0} is not semicartesian")]
    NotSemicartesian(String),
    #[error("{0} is not a cartesian site; pullbacks are unavailable")]
    NotCartesianSite(String),
    #[error("input coverage {name} fails {flavor}: {summary}")]
    UnverifiedInput {
        name: String,
        flavor: Flavor,
        summary: String,
    },
    #[error("unknown object {0}")]
    UnknownObject(String),
    #[error("leg {dom} → {target} is not a morphism")]
    BadLeg { dom: String, target: String },
    #[error("unknown flavor {0}")]
    UnknownFlavor(String),
    #[error(transparent)]
    MonCat(#[from] MonCatError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    Pretopology,
    WeakPrelopology,
    Prelopology,
    StrongPrelopology,
}

impl Flavor {
    pub const ALL: [Flavor; 4] = [
        Flavor::Pretopology,
        Flavor::WeakPrelopology,
        Flavor::Prelopology,
        Flavor::StrongPrelopology,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Flavor::Pretopology => "pretopology",
            Flavor::WeakPrelopology => "weak_prelopology",
            Flavor::Prelopology => "prelopology",
            Flavor::StrongPrelopology => "strong_prelopology",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.trim().to_ascii_lowercase().replace('-', "_");
        match s.as_str() {
            "weak" => Some(Flavor::WeakPrelopology),
            "strong" => Some(Flavor::StrongPrelopology),
            _ => Self::ALL.into_iter().find(|f| f.as_str() == s),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An indexed family of arrows into `target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoverFamily<O, M> {
    pub target: O,
    pub legs: Vec<M>,
}

impl<O, M: Clone + Ord> CoverFamily<O, M> {
    pub fn new(target: O, legs: Vec<M>) -> Self {
        CoverFamily { target, legs }
    }

    /// The distinct legs, sorted.
    pub fn support(&self) -> Vec<M> {
        support_of(&self.legs)
    }

    pub fn len(&self) -> usize {
        self.legs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.legs.is_empty()
    }
}

pub type Family<C> = CoverFamily<<C as MonoidalCategory>::Obj, <C as MonoidalCategory>::Mor>;

type Membership<C> =
    Arc<dyn Fn(&C, &<C as MonoidalCategory>::Obj, &[<C as MonoidalCategory>::Mor]) -> bool + Send + Sync>;

fn support_of<M: Clone + Ord>(legs: &[M]) -> Vec<M> {
    let mut s = legs.to_vec();
    s.sort();
    s.dedup();
    s
}

/// A coverage: for each object, the families declared to cover it.
pub struct Coverage<C: MonoidalCategory> {
    site: Arc<C>,
    name: String,
    flavor: Flavor,
    cap: usize,
    families: BTreeMap<C::Obj, Vec<Family<C>>>,
    member: Membership<C>,
}

impl<C: MonoidalCategory> Clone for Coverage<C> {
    fn clone(&self) -> Self {
        Coverage {
            site: Arc::clone(&self.site),
            name: self.name.clone(),
            flavor: self.flavor,
            cap: self.cap,
            families: self.families.clone(),
            member: Arc::clone(&self.member),
        }
    }
}

impl<C: MonoidalCategory> fmt::Debug for Coverage<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coverage")
            .field("site", &self.site.name())
            .field("name", &self.name)
            .field("flavor", &self.flavor)
            .field("families", &self.family_count())
            .finish()
    }
}

impl<C: MonoidalCategory + 'static> Coverage<C> {
    /// Every family of candidate legs whose support satisfies `member`.
    pub fn from_predicate<P>(site: Arc<C>, name: impl Into<String>, flavor: Flavor, cap: usize, member: P) -> Self
    where
        P: Fn(&C, &C::Obj, &[C::Mor]) -> bool + Send + Sync + 'static,
    {
        let member: Membership<C> = Arc::new(member);
        let mut families = BTreeMap::new();
        for u in site.objects() {
            let candidates = legs_into(site.as_ref(), &u);
            let mut found = Vec::new();
            for mask in 0u64..(1u64 << candidates.len()) {
                let support: Vec<C::Mor> = (0..candidates.len())
                    .filter(|&k| mask >> k & 1 == 1)
                    .map(|k| candidates[k].clone())
                    .collect();
                if member(site.as_ref(), &u, &support) {
                    found.extend(expand_multiplicities(&u, &support, cap));
                }
            }
            found.sort();
            families.insert(u, found);
        }
        Coverage {
            site,
            name: name.into(),
            flavor,
            cap,
            families,
            member,
        }
    }

    /// A coverage given by explicit supports; each support covers its target.
    pub fn from_supports(
        site: Arc<C>,
        name: impl Into<String>,
        flavor: Flavor,
        cap: usize,
        supports: BTreeMap<C::Obj, Vec<Vec<C::Mor>>>,
    ) -> Result<Self, CoverageError> {
        for (u, list) in &supports {
            for leg in list.iter().flatten() {
                if &site.cod(leg) != u {
                    return Err(CoverageError::BadLeg {
                        dom: site.describe(&site.dom(leg)),
                        target: site.describe(u),
                    });
                }
            }
        }
        let table: BTreeMap<C::Obj, Vec<Vec<C::Mor>>> = supports
            .into_iter()
            .map(|(u, list)| {
                let mut list: Vec<_> = list.iter().map(|s| support_of(s)).collect();
                list.sort();
                list.dedup();
                (u, list)
            })
            .collect();
        let mut families = BTreeMap::new();
        for u in site.objects() {
            let mut found: Vec<Family<C>> = table
                .get(&u)
                .into_iter()
                .flatten()
                .flat_map(|s| expand_multiplicities(&u, s, cap))
                .collect();
            found.sort();
            families.insert(u, found);
        }
        let member: Membership<C> = Arc::new(move |_, u, support| {
            table
                .get(u)
                .is_some_and(|list| list.binary_search_by(|s| s.as_slice().cmp(support)).is_ok())
        });
        Ok(Coverage {
            site,
            name: name.into(),
            flavor,
            cap,
            families,
            member,
        })
    }

    /// Only nonempty families of isomorphisms cover.
    pub fn trivial(site: Arc<C>) -> Self {
        let name = format!("trivial({})", site.name());
        Self::from_predicate(
            site,
            name,
            Flavor::StrongPrelopology,
            DEFAULT_MULTIPLICITY,
            |c, _, support| !support.is_empty() && support.iter().all(|f| is_iso(c, f)),
        )
    }

    /// The same coverage with the given supports removed.
    pub fn without_supports(&self, name: impl Into<String>, removed: Vec<(C::Obj, Vec<C::Mor>)>) -> Self {
        let removed: Vec<(C::Obj, Vec<C::Mor>)> = removed.into_iter().map(|(u, s)| (u, support_of(&s))).collect();
        let inner = Arc::clone(&self.member);
        let gone = removed.clone();
        let member: Membership<C> = Arc::new(move |c, u, support| {
            inner(c, u, support) && !gone.iter().any(|(v, s)| v == u && s.as_slice() == support)
        });
        let families = self
            .families
            .iter()
            .map(|(u, list)| {
                let kept = list
                    .iter()
                    .filter(|f| {
                        let s = f.support();
                        !removed.iter().any(|(v, r)| v == u && r == &s)
                    })
                    .cloned()
                    .collect();
                (u.clone(), kept)
            })
            .collect();
        Coverage {
            site: Arc::clone(&self.site),
            name: name.into(),
            flavor: self.flavor,
            cap: self.cap,
            families,
            member,
        }
    }
}

impl<C: MonoidalCategory> Coverage<C> {
    pub fn site(&self) -> &Arc<C> {
        &self.site
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn with_flavor(mut self, flavor: Flavor) -> Self {
        self.flavor = flavor;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn multiplicity_cap(&self) -> usize {
        self.cap
    }

    /// The enumerated families covering `u`.
    pub fn families(&self, u: &C::Obj) -> &[Family<C>] {
        self.families.get(u).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn all_families(&self) -> impl Iterator<Item = &Family<C>> + '_ {
        self.families.values().flatten()
    }

    pub fn family_count(&self) -> usize {
        self.families.values().map(Vec::len).sum()
    }

    /// Whether the family covers its target; legs must land in the target.
    pub fn covers(&self, family: &Family<C>) -> bool {
        self.covers_legs(&family.target, &family.legs)
    }

    pub fn covers_legs(&self, target: &C::Obj, legs: &[C::Mor]) -> bool {
        legs.iter().all(|f| &self.site.cod(f) == target) && (self.member)(self.site.as_ref(), target, &support_of(legs))
    }

    /// A human-readable rendering such as `{h, h} → 1`.
    pub fn describe_family(&self, family: &Family<C>) -> String {
        describe_legs(self.site.as_ref(), &family.target, &family.legs)
    }

    fn describe_at(&self, u: &C::Obj, legs: &[C::Mor]) -> String {
        describe_legs(self.site.as_ref(), u, legs)
    }
}

fn describe_legs<C: MonoidalCategory>(c: &C, u: &C::Obj, legs: &[C::Mor]) -> String {
    let parts: Vec<String> = legs
        .iter()
        .map(|f| {
            let d = c.dom(f);
            let hom = c.hom(&d, u);
            match hom.iter().position(|g| g == f) {
                Some(k) if hom.len() > 1 => format!("{}#{k}", c.describe(&d)),
                _ => c.describe(&d),
            }
        })
        .collect();
    format!("{{{}}} → {}", parts.join(", "), c.describe(u))
}

/// Every morphism from a listed object into `u`.
pub fn legs_into<C: MonoidalCategory>(c: &C, u: &C::Obj) -> Vec<C::Mor> {
    let mut out: Vec<C::Mor> = c.objects().iter().flat_map(|v| c.hom(v, u)).collect();
    out.sort();
    out.dedup();
    out
}

/// All indexed families with the given support and each leg at most `cap` times.
fn expand_multiplicities<O: Clone, M: Clone>(u: &O, support: &[M], cap: usize) -> Vec<CoverFamily<O, M>> {
    let cap = cap.max(1);
    let mut out = Vec::new();
    let mut counts = vec![1usize; support.len()];
    loop {
        let legs = support
            .iter()
            .zip(&counts)
            .flat_map(|(m, &k)| std::iter::repeat_n(m.clone(), k))
            .collect();
        out.push(CoverFamily {
            target: u.clone(),
            legs,
        });
        let mut k = counts.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            counts[k] += 1;
            if counts[k] <= cap {
                break;
            }
            counts[k] = 1;
        }
    }
}

/// Whether `f` has a two-sided inverse.
pub fn is_iso<C: MonoidalCategory>(c: &C, f: &C::Mor) -> bool {
    let (a, b) = (c.dom(f), c.cod(f));
    let (ia, ib) = (c.id(&a), c.id(&b));
    c.hom(&b, &a)
        .iter()
        .any(|g| c.compose(g, f).is_ok_and(|x| x == ia) && c.compose(f, g).is_ok_and(|x| x == ib))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Isomorphisms,
    Composition,
    TensorStability,
    PseudoPullbackStability,
    Factorization,
    PullbackStability,
}

impl Axiom {
    /// Position of the axiom in its definition.
    pub fn number(self) -> u8 {
        match self {
            Axiom::Isomorphisms => 1,
            Axiom::Composition => 2,
            Axiom::TensorStability | Axiom::PullbackStability => 3,
            Axiom::PseudoPullbackStability => 4,
            Axiom::Factorization => 5,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Axiom::Isomorphisms => "isomorphisms",
            Axiom::Composition => "composition",
            Axiom::TensorStability => "tensor_stability",
            Axiom::PseudoPullbackStability => "pseudo_pullback_stability",
            Axiom::Factorization => "factorization",
            Axiom::PullbackStability => "pullback_stability",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "axiom {} ({})", self.number(), self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    pub family: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomTally {
    pub axiom: Axiom,
    pub instances: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageReport {
    pub coverage: String,
    pub site: String,
    pub flavor: Flavor,
    pub families: usize,
    pub tallies: Vec<AxiomTally>,
    pub violations: Vec<AxiomViolation>,
    pub passed: bool,
}

impl CoverageReport {
    pub fn violated(&self) -> Vec<Axiom> {
        self.tallies
            .iter()
            .filter(|t| t.failures > 0)
            .map(|t| t.axiom)
            .collect()
    }

    pub fn first_violation(&self, axiom: Axiom) -> Option<&AxiomViolation> {
        self.violations.iter().find(|v| v.axiom == axiom)
    }

    pub fn summary(&self) -> String {
        if self.passed {
            format!("{} passes {}", self.coverage, self.flavor)
        } else {
            let ax: Vec<String> = self.violated().iter().map(ToString::to_string).collect();
            format!("{} fails {}: {}", self.coverage, self.flavor, ax.join(", "))
        }
    }
}

struct Tally {
    axiom: Axiom,
    instances: usize,
    failures: usize,
    witnesses: Vec<AxiomViolation>,
}

impl Tally {
    fn new(axiom: Axiom) -> Self {
        Tally {
            axiom,
            instances: 0,
            failures: 0,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> (String, String)) {
        self.instances += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < WITNESS_CAP {
                let (family, detail) = witness();
                self.witnesses.push(AxiomViolation {
                    axiom: self.axiom,
                    family,
                    detail,
                });
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.instances += other.instances;
        self.failures += other.failures;
        let room = WITNESS_CAP.saturating_sub(self.witnesses.len());
        self.witnesses.extend(other.witnesses.into_iter().take(room));
        self
    }
}

fn finish<C: MonoidalCategory>(cov: &Coverage<C>, flavor: Flavor, tallies: Vec<Tally>) -> CoverageReport {
    let passed = tallies.iter().all(|t| t.failures == 0);
    let mut violations = Vec::new();
    let mut summary = Vec::new();
    for t in tallies {
        summary.push(AxiomTally {
            axiom: t.axiom,
            instances: t.instances,
            failures: t.failures,
        });
        violations.extend(t.witnesses);
    }
    CoverageReport {
        coverage: cov.name.clone(),
        site: cov.site.name(),
        flavor,
        families: cov.family_count(),
        tallies: summary,
        violations,
        passed,
    }
}

/// Runs `per_family` over every enumerated family in parallel, merging in order.
fn over_families<C, F>(cov: &Coverage<C>, axiom: Axiom, per_family: F) -> Tally
where
    C: MonoidalCategory,
    F: Fn(&Family<C>, &mut Tally) + Sync + Send,
{
    let all: Vec<&Family<C>> = cov.all_families().collect();
    let parts: Vec<Tally> = all
        .par_iter()
        .map(|fam| {
            let mut t = Tally::new(axiom);
            per_family(fam, &mut t);
            t
        })
        .collect();
    parts.into_iter().fold(Tally::new(axiom), Tally::merge)
}

fn axiom_isomorphisms<C: MonoidalCategory>(cov: &Coverage<C>) -> Tally {
    let c = cov.site.as_ref();
    let mut t = Tally::new(Axiom::Isomorphisms);
    for u in c.objects() {
        for f in legs_into(c, &u).into_iter().filter(|f| is_iso(c, f)) {
            let legs = [f];
            t.record(cov.covers_legs(&u, &legs), || {
                (
                    cov.describe_at(&u, &legs),
                    "isomorphism singleton is not a cover".into(),
                )
            });
        }
    }
    t
}

fn axiom_composition<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<Tally, CoverageError> {
    let c = cov.site.as_ref();
    let failed = std::sync::Mutex::new(None);
    let t = over_families(cov, Axiom::Composition, |fam, t| {
        for (i, fi) in fam.legs.iter().enumerate() {
            if i > 0 && fam.legs[i - 1] == *fi {
                continue;
            }
            for refine in cov.families(&c.dom(fi)) {
                let mut legs: Vec<C::Mor> = fam
                    .legs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != i)
                    .map(|(_, f)| f.clone())
                    .collect();
                for g in &refine.legs {
                    match c.compose(fi, g) {
                        Ok(h) => legs.push(h),
                        Err(e) => {
                            failed.lock().unwrap().get_or_insert(e);
                            return;
                        }
                    }
                }
                t.record(cov.covers_legs(&fam.target, &legs), || {
                    (
                        cov.describe_family(fam),
                        format!(
                            "refining leg {i} by {} gives {}, not a cover",
                            cov.describe_family(refine),
                            cov.describe_at(&fam.target, &legs)
                        ),
                    )
                });
            }
        }
    });
    match failed.into_inner().unwrap() {
        Some(e) => Err(e.into()),
        None => Ok(t),
    }
}

fn axiom_tensor<C: MonoidalCategory>(cov: &Coverage<C>) -> Tally {
    let c = cov.site.as_ref();
    let objects = c.objects();
    over_families(cov, Axiom::TensorStability, |fam, t| {
        for v in &objects {
            let idv = c.id(v);
            let right: Vec<C::Mor> = fam.legs.iter().map(|f| c.tensor_mor(f, &idv)).collect();
            let uv = c.tensor(&fam.target, v);
            t.record(cov.covers_legs(&uv, &right), || {
                (
                    cov.describe_family(fam),
                    format!("f_i ⊗ {} is not a cover of {}", c.describe(v), c.describe(&uv)),
                )
            });
            let left: Vec<C::Mor> = fam.legs.iter().map(|f| c.tensor_mor(&idv, f)).collect();
            let vu = c.tensor(v, &fam.target);
            t.record(cov.covers_legs(&vu, &left), || {
                (
                    cov.describe_family(fam),
                    format!("{} ⊗ f_i is not a cover of {}", c.describe(v), c.describe(&vu)),
                )
            });
        }
    })
}

/// The comparison arrows `φ_i` into the pseudo-pullback of `id_U` and `g`
/// (`left_side`), or of `g` and `id_U`.
type FamilyShape<C> = (<C as MonoidalCategory>::Obj, Vec<<C as MonoidalCategory>::Mor>);

fn comparison_family<C: MonoidalCategory>(
    c: &C,
    fam: &Family<C>,
    g: &C::Mor,
    left_side: bool,
) -> Result<Option<FamilyShape<C>>, MonCatError> {
    let idu = c.id(&fam.target);
    let idv = c.id(&c.dom(g));
    let base = if left_side {
        pseudo_pullback(c, &idu, g)?
    } else {
        pseudo_pullback(c, g, &idu)?
    };
    let mut phis = Vec::with_capacity(fam.legs.len());
    for f in &fam.legs {
        let (pp, h) = if left_side {
            let pp = pseudo_pullback(c, f, g)?;
            let h = c.compose(&c.tensor_mor(f, &idv), &pp.e)?;
            (pp, h)
        } else {
            let pp = pseudo_pullback(c, g, f)?;
            let h = c.compose(&c.tensor_mor(&idv, f), &pp.e)?;
            (pp, h)
        };
        debug_assert_eq!(c.dom(&h), pp.apex);
        match c.lifts(&[(base.e.clone(), h)], 1).into_iter().next() {
            Some(phi) => phis.push(phi),
            None => return Ok(None),
        }
    }
    Ok(Some((base.apex, phis)))
}

fn axiom_pseudo_pullback<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<Tally, CoverageError> {
    let c = cov.site.as_ref();
    let objects = c.objects();
    let failed = std::sync::Mutex::new(None);
    let t = over_families(cov, Axiom::PseudoPullbackStability, |fam, t| {
        for v in &objects {
            for g in c.hom(v, &fam.target) {
                for left_side in [true, false] {
                    match comparison_family(c, fam, &g, left_side) {
                        Ok(Some((apex, phis))) => t.record(cov.covers_legs(&apex, &phis), || {
                            (
                                cov.describe_family(fam),
                                format!(
                                    "along {} → {} ({} side) the induced family {} is not a cover",
                                    c.describe(v),
                                    c.describe(&fam.target),
                                    if left_side { "left" } else { "right" },
                                    cov.describe_at(&apex, &phis)
                                ),
                            )
                        }),
                        Ok(None) => t.record(false, || {
                            (
                                cov.describe_family(fam),
                                format!("no comparison arrow along {}", c.describe(v)),
                            )
                        }),
                        Err(e) => {
                            failed.lock().unwrap().get_or_insert(e);
                            return;
                        }
                    }
                }
            }
        }
    });
    match failed.into_inner().unwrap() {
        Some(e) => Err(e.into()),
        None => Ok(t),
    }
}

fn axiom_factorization<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<Tally, CoverageError> {
    let c = cov.site.as_ref();
    let objects = c.objects();
    let failed = std::sync::Mutex::new(None);
    let t = over_families(cov, Axiom::Factorization, |fam, t| {
        for v in &objects {
            match exists_l_r_factorizations(c, &fam.legs, v) {
                Ok(rep) => t.record(rep.holds, || {
                    let w = rep.first_failure().expect("a failing report has a failing pair");
                    (
                        cov.describe_family(fam),
                        format!(
                            "with V = {}, legs ({}, {}): l {}, r {}",
                            c.describe(v),
                            w.i,
                            w.j,
                            if w.left_found { "found" } else { "missing" },
                            if w.right_found { "found" } else { "missing" }
                        ),
                    )
                }),
                Err(e) => {
                    failed.lock().unwrap().get_or_insert(e);
                    return;
                }
            }
        }
    });
    match failed.into_inner().unwrap() {
        Some(e) => Err(e.into()),
        None => Ok(t),
    }
}

fn axiom_pullback<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<Tally, CoverageError> {
    let c = cov.site.as_ref();
    let objects = c.objects();
    let missing = std::sync::atomic::AtomicBool::new(false);
    let t = over_families(cov, Axiom::PullbackStability, |fam, t| {
        for v in &objects {
            for g in c.hom(v, &fam.target) {
                let mut legs = Vec::with_capacity(fam.legs.len());
                for f in &fam.legs {
                    match c.pullback(f, &g) {
                        Some((_, _, p2)) => legs.push(p2),
                        None => {
                            missing.store(true, std::sync::atomic::Ordering::Relaxed);
                            return;
                        }
                    }
                }
                t.record(cov.covers_legs(v, &legs), || {
                    (
                        cov.describe_family(fam),
                        format!(
                            "pullback along {} → {} gives {}, not a cover",
                            c.describe(v),
                            c.describe(&fam.target),
                            cov.describe_at(v, &legs)
                        ),
                    )
                });
            }
        }
    });
    if missing.into_inner() {
        return Err(CoverageError::NotCartesianSite(c.name()));
    }
    Ok(t)
}

/// Axioms 1–3: isomorphisms, composition, two-sided tensor stability.
pub fn check_weak_prelopology<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<CoverageReport, CoverageError> {
    let tallies = vec![axiom_isomorphisms(cov), axiom_composition(cov)?, axiom_tensor(cov)];
    Ok(finish(cov, Flavor::WeakPrelopology, tallies))
}

/// Axioms 1–4, adding stability under pseudo-pullback comparison arrows.
pub fn check_prelopology<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<CoverageReport, CoverageError> {
    let tallies = vec![
        axiom_isomorphisms(cov),
        axiom_composition(cov)?,
        axiom_tensor(cov),
        axiom_pseudo_pullback(cov)?,
    ];
    Ok(finish(cov, Flavor::Prelopology, tallies))
}

/// Axioms 1–5, adding the `l`/`r` factorizations for every cover and object.
pub fn check_strong_prelopology<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<CoverageReport, CoverageError> {
    let tallies = vec![
        axiom_isomorphisms(cov),
        axiom_composition(cov)?,
        axiom_tensor(cov),
        axiom_pseudo_pullback(cov)?,
        axiom_factorization(cov)?,
    ];
    Ok(finish(cov, Flavor::StrongPrelopology, tallies))
}

/// Isomorphisms, composition and stability under genuine pullbacks.
pub fn check_pretopology<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<CoverageReport, CoverageError> {
    if !cov.site.is_cartesian() {
        return Err(CoverageError::NotCartesianSite(cov.site.name()));
    }
    let tallies = vec![axiom_isomorphisms(cov), axiom_composition(cov)?, axiom_pullback(cov)?];
    Ok(finish(cov, Flavor::Pretopology, tallies))
}

/// Runs the checker matching `flavor`.
pub fn check_flavor<C: MonoidalCategory>(cov: &Coverage<C>, flavor: Flavor) -> Result<CoverageReport, CoverageError> {
    match flavor {
        Flavor::Pretopology => check_pretopology(cov),
        Flavor::WeakPrelopology => check_weak_prelopology(cov),
        Flavor::Prelopology => check_prelopology(cov),
        Flavor::StrongPrelopology => check_strong_prelopology(cov),
    }
}

/// Runs the checker for the coverage's own claimed flavor.
pub fn verify<C: MonoidalCategory>(cov: &Coverage<C>) -> Result<CoverageReport, CoverageError> {
    check_flavor(cov, cov.flavor)
}

// Thin sites.

fn join_of_doms(c: &ThinCat, legs: &[ThinMor]) -> usize {
    c.quantale().join_all(legs.iter().map(|f| f.dom))
}

/// `{u_i → u}` covers `u` iff the join of the `u_i` is `u`.
pub fn canonical_quantale_coverage(site: Arc<ThinCat>) -> Result<Coverage<ThinCat>, CoverageError> {
    canonical_quantale_coverage_with(site, DEFAULT_MULTIPLICITY)
}

pub fn canonical_quantale_coverage_with(site: Arc<ThinCat>, cap: usize) -> Result<Coverage<ThinCat>, CoverageError> {
    if !site.quantale().classify().semicartesian {
        return Err(CoverageError::NotSemicartesian(site.name()));
    }
    let name = format!("canonical({})", site.name());
    Ok(Coverage::from_predicate(
        site,
        name,
        Flavor::StrongPrelopology,
        cap,
        |c, u, legs| join_of_doms(c, legs) == *u,
    ))
}

/// Whether membership coincides with the join rule on every support.
pub fn is_canonical_quantalic(cov: &Coverage<ThinCat>) -> bool {
    let c = cov.site().as_ref();
    c.objects().into_iter().all(|u| {
        let cands = legs_into(c, &u);
        (0u64..(1u64 << cands.len())).all(|mask| {
            let legs: Vec<ThinMor> = (0..cands.len())
                .filter(|&k| mask >> k & 1 == 1)
                .map(|k| cands[k])
                .collect();
            cov.covers_legs(&u, &legs) == (join_of_doms(c, &legs) == u)
        })
    })
}

/// Covers of `(C, D)` are the families whose two projections cover `C` and `D`.
pub fn product_coverage(l1: &Coverage<ThinCat>, l2: &Coverage<ThinCat>) -> Result<Coverage<ThinCat>, CoverageError> {
    for l in [l1, l2] {
        let report = check_prelopology(l)?;
        if !report.passed {
            return Err(CoverageError::UnverifiedInput {
                name: l.name().to_string(),
                flavor: Flavor::Prelopology,
                summary: report.summary(),
            });
        }
    }
    let q = l1.site().quantale().product(l2.site().quantale());
    let site = Arc::new(ThinCat::new(Arc::new(q))?);
    let n2 = l2.site().quantale().len();
    let (a, b) = (l1.clone(), l2.clone());
    let name = format!("{}×{}", l1.name(), l2.name());
    let flavor = if l1.flavor() == Flavor::Pretopology && l2.flavor() == Flavor::Pretopology {
        Flavor::Pretopology
    } else {
        Flavor::Prelopology
    };
    let cap = l1.multiplicity_cap().max(l2.multiplicity_cap());
    Ok(Coverage::from_predicate(site, name, flavor, cap, move |_, u, legs| {
        let (cu, du) = crate::quantale::Quantale::unpair(*u, n2);
        let left: Vec<ThinMor> = legs.iter().map(|f| ThinMor::new(f.dom / n2, cu)).collect();
        let right: Vec<ThinMor> = legs.iter().map(|f| ThinMor::new(f.dom % n2, du)).collect();
        a.covers_legs(&cu, &left) && b.covers_legs(&du, &right)
    }))
}

/// One variant per non-identity support: the coverage with that support deleted.
pub fn single_deletions(cov: &Coverage<ThinCat>) -> Vec<Coverage<ThinCat>> {
    let mut supports: Vec<(usize, Vec<ThinMor>)> = cov.all_families().map(|f| (f.target, f.support())).collect();
    supports.sort();
    supports.dedup();
    supports
        .into_iter()
        .filter(|(u, s)| !(s.len() == 1 && s[0].dom == *u))
        .map(|(u, s)| {
            let name = format!("{} minus {}", cov.name(), describe_legs(cov.site().as_ref(), &u, &s));
            cov.without_supports(name, vec![(u, s)])
        })
        .collect()
}

/// The JSON form of a coverage on a thin site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoverageSpec {
    Canonical {
        canonical: bool,
        #[serde(default)]
        flavor: Option<String>,
        #[serde(default)]
        multiplicity: Option<usize>,
    },
    Trivial {
        trivial: bool,
        #[serde(default)]
        flavor: Option<String>,
    },
    Listed {
        #[serde(default)]
        name: Option<String>,
        flavor: String,
        covers: Vec<CoverSpec>,
        #[serde(default)]
        multiplicity: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub target: String,
    pub legs: Vec<LegSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegSpec {
    pub dom: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mor: Option<String>,
}

fn parse_flavor(s: Option<&str>, default: Flavor) -> Result<Flavor, CoverageError> {
    match s {
        None => Ok(default),
        Some(s) => Flavor::parse(s).ok_or_else(|| CoverageError::UnknownFlavor(s.to_string())),
    }
}

impl Coverage<ThinCat> {
    pub fn from_spec(site: Arc<ThinCat>, spec: &CoverageSpec) -> Result<Self, CoverageError> {
        match spec {
            CoverageSpec::Canonical {
                canonical,
                flavor,
                multiplicity,
            } => {
                if !canonical {
                    return Err(CoverageError::UnknownFlavor("canonical: false".into()));
                }
                let flavor = parse_flavor(flavor.as_deref(), Flavor::StrongPrelopology)?;
                Ok(
                    canonical_quantale_coverage_with(site, multiplicity.unwrap_or(DEFAULT_MULTIPLICITY))?
                        .with_flavor(flavor),
                )
            }
            CoverageSpec::Trivial { trivial, flavor } => {
                if !trivial {
                    return Err(CoverageError::UnknownFlavor("trivial: false".into()));
                }
                let flavor = parse_flavor(flavor.as_deref(), Flavor::StrongPrelopology)?;
                Ok(Coverage::trivial(site).with_flavor(flavor))
            }
            CoverageSpec::Listed {
                name,
                flavor,
                covers,
                multiplicity,
            } => {
                let flavor = parse_flavor(Some(flavor), Flavor::Prelopology)?;
                let q = Arc::clone(site.quantale());
                let find = |l: &str| q.index_of(l).ok_or_else(|| CoverageError::UnknownObject(l.to_string()));
                let mut supports: BTreeMap<usize, Vec<Vec<ThinMor>>> = BTreeMap::new();
                for cover in covers {
                    let u = find(&cover.target)?;
                    let mut legs = Vec::new();
                    for leg in &cover.legs {
                        let d = find(&leg.dom)?;
                        if !q.leq(d, u) {
                            return Err(CoverageError::BadLeg {
                                dom: leg.dom.clone(),
                                target: cover.target.clone(),
                            });
                        }
                        legs.push(ThinMor::new(d, u));
                    }
                    supports.entry(u).or_default().push(legs);
                }
                let name = name.clone().unwrap_or_else(|| format!("listed({})", site.name()));
                Coverage::from_supports(
                    site,
                    name,
                    flavor,
                    multiplicity.unwrap_or(DEFAULT_MULTIPLICITY),
                    supports,
                )
            }
        }
    }

    /// The listed form: one entry per distinct support.
    pub fn to_spec(&self) -> CoverageSpec {
        let q = self.site.quantale();
        let mut supports: Vec<(usize, Vec<ThinMor>)> = self.all_families().map(|f| (f.target, f.support())).collect();
        supports.sort();
        supports.dedup();
        CoverageSpec::Listed {
            name: Some(self.name.clone()),
            flavor: self.flavor.as_str().to_string(),
            covers: supports
                .into_iter()
                .map(|(u, legs)| CoverSpec {
                    target: q.label(u).to_string(),
                    legs: legs
                        .iter()
                        .map(|m| LegSpec {
                            dom: q.label(m.dom).to_string(),
                            mor: None,
                        })
                        .collect(),
                })
                .collect(),
            multiplicity: Some(self.cap),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moncat::{Defect, FinSetCat};
    use crate::quantale::{build_standard, StandardQuantale};

    fn thin(name: StandardQuantale, n: usize) -> Arc<ThinCat> {
        Arc::new(ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap())
    }

    fn supports_of(cov: &Coverage<ThinCat>, u: usize) -> Vec<Vec<&str>> {
        let q = cov.site().quantale();
        let mut out: Vec<Vec<&str>> = cov
            .families(&u)
            .iter()
            .map(|f| f.support().iter().map(|m| q.label(m.dom)).collect())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn powerset_top_covers() {
        let cov = canonical_quantale_coverage(thin(StandardQuantale::PowersetLocale, 2)).unwrap();
        let q = cov.site().quantale().clone();
        let top = q.top();
        let s = supports_of(&cov, top);
        assert!(s.contains(&vec!["{x}", "{y}"]));
        assert!(s.contains(&vec!["{x}", "{x,y}"]));
        assert!(s.contains(&vec!["{x,y}"]));
        assert!(!s.contains(&vec!["{}", "{x}"]));
    }

    #[test]
    fn lukasiewicz_covers_by_join_scan() {
        let cov = canonical_quantale_coverage(thin(StandardQuantale::LukasiewiczChain, 3)).unwrap();
        let q = cov.site().quantale().clone();
        let (h, one) = (q.index_of("h").unwrap(), q.index_of("1").unwrap());
        assert!(supports_of(&cov, one).iter().all(|s| s.contains(&"1")));
        assert!(supports_of(&cov, h).iter().all(|s| s.contains(&"h")));
        // {h, h} is a separate family from {h}
        let hh = cov
            .families(&h)
            .iter()
            .filter(|f| f.legs.iter().all(|m| m.dom == h))
            .count();
        assert_eq!(hh, 2);
        // the empty family covers the bottom only
        assert!(cov.covers_legs(&q.bottom(), &[]));
        assert!(!cov.covers_legs(&h, &[]));
    }

    #[test]
    fn truncated_nat_join_is_min() {
        let cov = canonical_quantale_coverage(thin(StandardQuantale::TruncatedNat, 3)).unwrap();
        let q = cov.site().quantale().clone();
        let (one, two) = (q.index_of("1").unwrap(), q.index_of("2").unwrap());
        assert!(cov.covers_legs(&one, &[ThinMor::new(one, one), ThinMor::new(two, one)]));
    }

    #[test]
    fn canonical_coverages_are_strong() {
        for (name, n) in [
            (StandardQuantale::LukasiewiczChain, 3),
            (StandardQuantale::TruncatedNat, 3),
            (StandardQuantale::PowersetLocale, 2),
            (StandardQuantale::IdealsZmod, 12),
            (StandardQuantale::ChainLocale, 4),
        ] {
            let cov = canonical_quantale_coverage(thin(name, n)).unwrap();
            let r = check_strong_prelopology(&cov).unwrap();
            assert!(r.passed, "{}", r.summary());
            assert!(is_canonical_quantalic(&cov));
        }
    }

    #[test]
    fn deleting_a_refinement_breaks_composition() {
        let site = thin(StandardQuantale::LukasiewiczChain, 3);
        let cov = canonical_quantale_coverage(site.clone()).unwrap();
        let q = site.quantale().clone();
        let (h, one) = (q.index_of("h").unwrap(), q.index_of("1").unwrap());
        // {1 ← h, 1 ← 1} arises by refining the leg 1 of {1, 1}... delete it
        let cut = cov.without_supports("cut", vec![(one, vec![ThinMor::new(h, one), ThinMor::new(one, one)])]);
        let r = check_weak_prelopology(&cut).unwrap();
        assert!(!r.passed);
        assert!(r.violated().contains(&Axiom::Composition));
        assert!(r.first_violation(Axiom::Composition).is_some());
    }

    #[test]
    fn locale_without_pullback_stability() {
        let site = thin(StandardQuantale::PowersetLocale, 2);
        let q = site.quantale().clone();
        let x = q.index_of("{x}").unwrap();
        let bottom = q.bottom();
        let cov = canonical_quantale_coverage(site.clone()).unwrap();
        // {x} ∧ {{x}, {y}} = {{x}, ∅}
        let cut = cov.without_supports("cut", vec![(x, vec![ThinMor::new(bottom, x), ThinMor::new(x, x)])]);
        let r = check_prelopology(&cut).unwrap();
        assert!(r.violated().contains(&Axiom::PseudoPullbackStability));
        let p = check_pretopology(&cut).unwrap();
        assert!(p.violated().contains(&Axiom::PullbackStability));
    }

    #[test]
    fn pretopology_requires_cartesian_site() {
        let cov = canonical_quantale_coverage(thin(StandardQuantale::LukasiewiczChain, 3)).unwrap();
        assert!(matches!(
            check_pretopology(&cov),
            Err(CoverageError::NotCartesianSite(_))
        ));
    }

    #[test]
    fn trivial_coverage_passes_everything_on_locales() {
        let cov = Coverage::trivial(thin(StandardQuantale::ChainLocale, 3));
        assert!(check_pretopology(&cov).unwrap().passed);
        assert!(check_strong_prelopology(&cov).unwrap().passed);
    }

    #[test]
    fn bridge_on_locale_mutations() {
        for (name, n) in [
            (StandardQuantale::PowersetLocale, 2),
            (StandardQuantale::ChainLocale, 3),
        ] {
            let cov = canonical_quantale_coverage(thin(name, n)).unwrap();
            for m in single_deletions(&cov) {
                let a = check_pretopology(&m).unwrap().passed;
                let b = check_prelopology(&m).unwrap().passed;
                assert_eq!(a, b, "{}", m.name());
            }
        }
    }

    #[test]
    fn product_coverages() {
        let chain = canonical_quantale_coverage(thin(StandardQuantale::ChainLocale, 2)).unwrap();
        let luk = canonical_quantale_coverage(thin(StandardQuantale::LukasiewiczChain, 3)).unwrap();
        let triv = Coverage::trivial(thin(StandardQuantale::ChainLocale, 2));

        let p = product_coverage(&chain, &chain).unwrap();
        assert!(check_pretopology(&p).unwrap().passed);

        let mixed = product_coverage(&triv, &luk).unwrap();
        assert!(check_prelopology(&mixed).unwrap().passed);
        assert!(!is_canonical_quantalic(&mixed));
        assert!(matches!(
            check_pretopology(&mixed),
            Err(CoverageError::NotCartesianSite(_))
        ));

        let tt = product_coverage(&triv, &Coverage::trivial(thin(StandardQuantale::LukasiewiczChain, 3))).unwrap();
        let site = tt.site().clone();
        for u in site.objects() {
            assert!(tt.families(&u).iter().all(|f| f.legs.iter().all(|m| m.dom == u)));
        }
    }

    #[test]
    fn unverified_input_is_refused() {
        let site = thin(StandardQuantale::ChainLocale, 2);
        let cov = canonical_quantale_coverage(site.clone()).unwrap();
        let cut = cov.without_supports("cut", vec![(1, vec![ThinMor::new(1, 1)])]);
        assert!(matches!(
            product_coverage(&cut, &cov),
            Err(CoverageError::UnverifiedInput { .. })
        ));
    }

    #[test]
    fn finset_trivial_coverage_is_a_pretopology() {
        let site = Arc::new(FinSetCat::new(2));
        let cov = Coverage::trivial(site);
        let r = check_pretopology(&cov).unwrap();
        assert!(r.passed, "{:?}", r.violations);
        let skewed = Coverage::trivial(Arc::new(FinSetCat::with_defect(2, Defect::SkewedTensor)));
        assert!(check_weak_prelopology(&skewed).unwrap().passed);
    }

    #[test]
    fn listed_spec_round_trip() {
        let site = thin(StandardQuantale::LukasiewiczChain, 3);
        let spec: CoverageSpec = serde_json::from_str(
            r#"{"flavor":"prelopology","covers":[{"target":"1","legs":[{"dom":"1"}]},{"target":"h","legs":[{"dom":"h"}]},{"target":"0","legs":[{"dom":"0"}]}]}"#,
        )
        .unwrap();
        let cov = Coverage::from_spec(site.clone(), &spec).unwrap();
        assert!(check_prelopology(&cov).unwrap().passed);
        let canon: CoverageSpec = serde_json::from_str(r#"{"canonical":true}"#).unwrap();
        assert!(is_canonical_quantalic(
            &Coverage::from_spec(site.clone(), &canon).unwrap()
        ));
        let bad: CoverageSpec =
            serde_json::from_str(r#"{"flavor":"prelopology","covers":[{"target":"h","legs":[{"dom":"1"}]}]}"#).unwrap();
        assert!(matches!(
            Coverage::from_spec(site, &bad),
            Err(CoverageError::BadLeg { .. })
        ));
    }
}
