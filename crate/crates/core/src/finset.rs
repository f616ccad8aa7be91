//! Finite sets, total functions between them, and the finite (co)limits that
//! every other module is computed with.
//!
//! Elements carry string labels kept in sorted order, so two objects are equal
//! exactly when their label sets are. Constructed objects get canonical labels:
//! pairs are `(a,b)`, tuples `(a,b,c)`, coproduct elements `i:a`, and quotient
//! classes are named after their least member.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinSetError {
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("malformed label `{0}`: labels must be non-empty, bracket-balanced and free of top-level commas")]
    MalformedLabel(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("codomain mismatch: {0}")]
    CodomainMismatch(String),
    #[error("`{label}` is not an element of {set}")]
    NotAnElement { label: String, set: String },
    #[error("assignment is undefined on `{0}`")]
    Undefined(String),
}

/// Returns true when `label` can be used as an element label.
///
/// Composite labels are built by wrapping components in parentheses and
/// separating them with commas, so a component must not contain a comma at
/// bracket depth zero. That keeps every generated label unambiguous.
pub fn is_valid_label(label: &str) -> bool {
    if label.is_empty() {
        return false;
    }
    let mut depth: i64 = 0;
    for ch in label.chars() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            ',' if depth == 0 => return false,
            _ => {}
        }
    }
    depth == 0
}

/// Splits `a,b,c` at the commas that sit at bracket depth zero.
pub fn split_top_level(s: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i64;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Canonical label of an ordered tuple of labels.
pub fn tuple_label<S: AsRef<str>>(parts: &[S]) -> String {
    let mut out = String::from("(");
    for (k, p) in parts.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        out.push_str(p.as_ref());
    }
    out.push(')');
    out
}

/// A finite set with sorted, pairwise distinct labels.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinSetObj {
    elems: Arc<[String]>,
}

impl FinSetObj {
    /// Builds a set from user-supplied labels, validating each one.
    pub fn new<I, S>(labels: I) -> Result<Self, FinSetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if let Some(bad) = labels.iter().find(|l| !is_valid_label(l)) {
            return Err(FinSetError::MalformedLabel(bad.clone()));
        }
        Self::checked(labels)
    }

    fn checked(mut labels: Vec<String>) -> Result<Self, FinSetError> {
        labels.sort();
        if let Some(w) = labels.windows(2).find(|w| w[0] == w[1]) {
            return Err(FinSetError::DuplicateLabel(w[0].clone()));
        }
        Ok(FinSetObj { elems: labels.into() })
    }

    /// Internal constructor for labels produced by the canonical schemes.
    pub(crate) fn from_generated(labels: Vec<String>) -> Self {
        Self::checked(labels).expect("generated labels are distinct by construction")
    }

    pub fn empty() -> Self {
        FinSetObj {
            elems: Vec::new().into(),
        }
    }

    pub fn singleton(label: impl Into<String>) -> Self {
        FinSetObj {
            elems: vec![label.into()].into(),
        }
    }

    /// The set `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        Self::from_generated((0..n).map(|i| i.to_string()).collect())
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.elems
    }

    pub fn label(&self, i: usize) -> &str {
        &self.elems[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.elems.binary_search_by(|probe| probe.as_str().cmp(label)).ok()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index_of(label).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.elems.iter().map(String::as_str)
    }
}

impl fmt::Debug for FinSetObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.elems.join(", "))
    }
}

impl fmt::Display for FinSetObj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A total function between finite sets, stored as an index table.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinMap {
    dom: FinSetObj,
    cod: FinSetObj,
    map: Vec<usize>,
}

impl FinMap {
    /// Builds a map from a label assignment, which must be total on `dom`.
    pub fn new<'a, I>(dom: FinSetObj, cod: FinSetObj, assignment: I) -> Result<Self, FinSetError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut map = vec![usize::MAX; dom.len()];
        for (x, y) in assignment {
            let i = dom.index_of(x).ok_or_else(|| FinSetError::NotAnElement {
                label: x.to_string(),
                set: dom.to_string(),
            })?;
            let j = cod.index_of(y).ok_or_else(|| FinSetError::NotAnElement {
                label: y.to_string(),
                set: cod.to_string(),
            })?;
            map[i] = j;
        }
        if let Some(i) = map.iter().position(|&j| j == usize::MAX) {
            return Err(FinSetError::Undefined(dom.label(i).to_string()));
        }
        Ok(FinMap { dom, cod, map })
    }

    /// Builds a map from an index table; every entry must index into `cod`.
    pub fn from_indices(dom: FinSetObj, cod: FinSetObj, map: Vec<usize>) -> Result<Self, FinSetError> {
        if map.len() != dom.len() {
            return Err(FinSetError::DomainMismatch(format!(
                "table has {} entries but the domain has {} elements",
                map.len(),
                dom.len()
            )));
        }
        if let Some(&j) = map.iter().find(|&&j| j >= cod.len()) {
            return Err(FinSetError::CodomainMismatch(format!(
                "index {j} out of range for codomain {cod}"
            )));
        }
        Ok(FinMap { dom, cod, map })
    }

    pub(crate) fn from_table(dom: FinSetObj, cod: FinSetObj, map: Vec<usize>) -> Self {
        debug_assert_eq!(map.len(), dom.len());
        debug_assert!(map.iter().all(|&j| j < cod.len()));
        FinMap { dom, cod, map }
    }

    pub fn identity(set: &FinSetObj) -> Self {
        FinMap {
            dom: set.clone(),
            cod: set.clone(),
            map: (0..set.len()).collect(),
        }
    }

    /// The unique map into a singleton.
    pub fn to_point(dom: &FinSetObj, point: &FinSetObj) -> Self {
        assert_eq!(point.len(), 1, "target of to_point must be a singleton");
        FinMap::from_table(dom.clone(), point.clone(), vec![0; dom.len()])
    }

    pub fn dom(&self) -> &FinSetObj {
        &self.dom
    }

    pub fn cod(&self) -> &FinSetObj {
        &self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn apply_label(&self, label: &str) -> Option<&str> {
        self.dom.index_of(label).map(|i| self.cod.label(self.map[i]))
    }

    /// `g.after(f)` is the composite `g ∘ f`.
    pub fn after(&self, f: &FinMap) -> Result<FinMap, FinSetError> {
        if f.cod != self.dom {
            return Err(FinSetError::CodomainMismatch(format!(
                "cannot compose: {} is not {}",
                f.cod, self.dom
            )));
        }
        Ok(FinMap {
            dom: f.dom.clone(),
            cod: self.cod.clone(),
            map: f.map.iter().map(|&j| self.map[j]).collect(),
        })
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        self.map.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        for &j in &self.map {
            seen[j] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.len() == self.cod.len() && self.is_injective()
    }

    pub fn inverse(&self) -> Option<FinMap> {
        if !self.is_bijective() {
            return None;
        }
        let mut inv = vec![0; self.cod.len()];
        for (i, &j) in self.map.iter().enumerate() {
            inv[j] = i;
        }
        Some(FinMap::from_table(self.cod.clone(), self.dom.clone(), inv))
    }

    /// Membership table of the image.
    pub fn image_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.cod.len()];
        for &j in &self.map {
            mask[j] = true;
        }
        mask
    }

    /// Enumerates every map `dom -> cod` in lexicographic order of tables.
    pub fn all(dom: &FinSetObj, cod: &FinSetObj) -> AllMaps {
        AllMaps {
            dom: dom.clone(),
            cod: cod.clone(),
            next: if cod.is_empty() && !dom.is_empty() {
                None
            } else {
                Some(vec![0; dom.len()])
            },
        }
    }
}

impl fmt::Debug for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, &j) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}↦{}", self.dom.label(i), self.cod.label(j))?;
        }
        write!(f, "]")
    }
}

/// Iterator over all functions between two finite sets.
pub struct AllMaps {
    dom: FinSetObj,
    cod: FinSetObj,
    next: Option<Vec<usize>>,
}

impl Iterator for AllMaps {
    type Item = FinMap;

    fn next(&mut self) -> Option<FinMap> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let n = self.cod.len();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < n {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(FinMap::from_table(self.dom.clone(), self.cod.clone(), current))
    }
}

/// Disjoint-set forest whose roots are always the least index of their class.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Merges the classes of `a` and `b`; returns false if they already coincided.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Quotients `set` by the equivalence relation generated by `pairs`.
///
/// Classes are labelled by their least member, and the quotient map is
/// returned alongside the quotient object.
pub fn quotient<I>(set: &FinSetObj, pairs: I) -> (FinSetObj, FinMap)
where
    I: IntoIterator<Item = (usize, usize)>,
{
    let mut uf = UnionFind::new(set.len());
    for (a, b) in pairs {
        uf.union(a, b);
    }
    let roots: Vec<usize> = (0..set.len()).map(|i| uf.find(i)).collect();
    // Roots are least members, and labels are sorted, so the root order is
    // already the label order of the quotient.
    let mut class_of_root = vec![usize::MAX; set.len()];
    let mut labels = Vec::new();
    for i in 0..set.len() {
        if roots[i] == i {
            class_of_root[i] = labels.len();
            labels.push(set.label(i).to_string());
        }
    }
    let obj = FinSetObj { elems: labels.into() };
    let map = roots.iter().map(|&r| class_of_root[r]).collect();
    (obj.clone(), FinMap::from_table(set.clone(), obj, map))
}

/// The equalizer `{x : f(x) = g(x)}` with its inclusion.
pub fn equalizer(f: &FinMap, g: &FinMap) -> Result<(FinSetObj, FinMap), FinSetError> {
    if f.dom != g.dom || f.cod != g.cod {
        return Err(FinSetError::DomainMismatch(
            "equalizer needs a parallel pair".to_string(),
        ));
    }
    let kept: Vec<usize> = (0..f.dom.len()).filter(|&i| f.map[i] == g.map[i]).collect();
    Ok(subset(&f.dom, &kept))
}

/// The subset of `set` at the given (increasing) indices, with its inclusion.
pub fn subset(set: &FinSetObj, indices: &[usize]) -> (FinSetObj, FinMap) {
    debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
    let obj = FinSetObj {
        elems: indices
            .iter()
            .map(|&i| set.label(i).to_string())
            .collect::<Vec<_>>()
            .into(),
    };
    let incl = FinMap::from_table(obj.clone(), set.clone(), indices.to_vec());
    (obj, incl)
}

/// The coequalizer `cod / ~` with `~` generated by `f(x) ~ g(x)`.
pub fn coequalizer(f: &FinMap, g: &FinMap) -> Result<(FinSetObj, FinMap), FinSetError> {
    if f.dom != g.dom || f.cod != g.cod {
        return Err(FinSetError::DomainMismatch(
            "coequalizer needs a parallel pair".to_string(),
        ));
    }
    Ok(quotient(&f.cod, f.map.iter().copied().zip(g.map.iter().copied())))
}

/// A binary product with its projections and a pair lookup table.
#[derive(Clone, Debug)]
pub struct Product {
    pub obj: FinSetObj,
    pub proj1: FinMap,
    pub proj2: FinMap,
    width: usize,
    index: Vec<usize>,
}

impl Product {
    /// Index of the pair `(i, j)` in the product object.
    pub fn pair(&self, i: usize, j: usize) -> usize {
        self.index[i * self.width + j]
    }

    /// The mediating map `⟨f, g⟩ : Z -> A × B`.
    pub fn pairing(&self, f: &FinMap, g: &FinMap) -> Result<FinMap, FinSetError> {
        if f.dom != g.dom || f.cod != *self.proj1.cod() || g.cod != *self.proj2.cod() {
            return Err(FinSetError::DomainMismatch(
                "pairing needs maps from a common domain into the factors".to_string(),
            ));
        }
        let map = (0..f.dom.len()).map(|z| self.pair(f.map[z], g.map[z])).collect();
        Ok(FinMap::from_table(f.dom.clone(), self.obj.clone(), map))
    }
}

/// The cartesian product `A × B` with canonical pair labels `(a,b)`.
pub fn product(a: &FinSetObj, b: &FinSetObj) -> Product {
    let mut rows: Vec<(String, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            rows.push((tuple_label(&[x, y]), i, j));
        }
    }
    rows.sort();
    let mut index = vec![0; a.len() * b.len()];
    let mut p1 = Vec::with_capacity(rows.len());
    let mut p2 = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (k, (label, i, j)) in rows.into_iter().enumerate() {
        index[i * b.len() + j] = k;
        p1.push(i);
        p2.push(j);
        labels.push(label);
    }
    let obj = FinSetObj::from_generated(labels);
    Product {
        proj1: FinMap::from_table(obj.clone(), a.clone(), p1),
        proj2: FinMap::from_table(obj.clone(), b.clone(), p2),
        obj,
        width: b.len(),
        index,
    }
}

/// An n-ary product with tuple labels `(a,b,c)`; the empty product is `{()}`.
#[derive(Clone, Debug)]
pub struct TupleProduct {
    pub obj: FinSetObj,
    pub projections: Vec<FinMap>,
    factors: Vec<usize>,
    index: Vec<usize>,
}

impl TupleProduct {
    /// Index of the tuple with the given component indices.
    pub fn tuple(&self, components: &[usize]) -> usize {
        let mut flat = 0;
        for (c, &n) in components.iter().zip(&self.factors) {
            flat = flat * n + c;
        }
        self.index[flat]
    }

    /// Component indices of the element at `k`.
    pub fn components(&self, k: usize) -> Vec<usize> {
        self.projections.iter().map(|p| p.apply(k)).collect()
    }
}

pub fn product_n(sets: &[FinSetObj]) -> TupleProduct {
    let factors: Vec<usize> = sets.iter().map(FinSetObj::len).collect();
    let total: usize = factors.iter().product();
    let mut rows: Vec<(String, usize, Vec<usize>)> = Vec::with_capacity(total);
    let mut comp = vec![0usize; sets.len()];
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..sets.len()).rev() {
            comp[k] = rem % factors[k];
            rem /= factors[k];
        }
        let parts: Vec<&str> = comp.iter().zip(sets).map(|(&c, s)| s.label(c)).collect();
        rows.push((tuple_label(&parts), flat, comp.clone()));
    }
    rows.sort();
    let mut index = vec![0; total];
    let mut tables = vec![Vec::with_capacity(total); sets.len()];
    let mut labels = Vec::with_capacity(total);
    for (k, (label, flat, comp)) in rows.into_iter().enumerate() {
        index[flat] = k;
        for (t, c) in tables.iter_mut().zip(comp) {
            t.push(c);
        }
        labels.push(label);
    }
    let obj = FinSetObj::from_generated(labels);
    let projections = tables
        .into_iter()
        .zip(sets)
        .map(|(t, s)| FinMap::from_table(obj.clone(), s.clone(), t))
        .collect();
    TupleProduct {
        obj,
        projections,
        factors,
        index,
    }
}

/// The pullback `{(a,b) : f(a) = g(b)}` with its two projections.
pub fn pullback(f: &FinMap, g: &FinMap) -> Result<(FinSetObj, FinMap, FinMap), FinSetError> {
    if f.cod != g.cod {
        return Err(FinSetError::CodomainMismatch("pullback needs a cospan".to_string()));
    }
    let prod = product(&f.dom, &g.dom);
    let kept: Vec<usize> = (0..prod.obj.len())
        .filter(|&k| f.map[prod.proj1.map[k]] == g.map[prod.proj2.map[k]])
        .collect();
    let (obj, incl) = subset(&prod.obj, &kept);
    let p1 = prod.proj1.after(&incl)?;
    let p2 = prod.proj2.after(&incl)?;
    Ok((obj, p1, p2))
}

/// A tagged disjoint union with its injections.
#[derive(Clone, Debug)]
pub struct Coproduct {
    pub obj: FinSetObj,
    pub injections: Vec<FinMap>,
}

impl Coproduct {
    /// Finds the summand and the element index of a coproduct element.
    pub fn locate(&self, k: usize) -> (usize, usize) {
        for (t, inj) in self.injections.iter().enumerate() {
            if let Some(i) = inj.map.iter().position(|&j| j == k) {
                return (t, i);
            }
        }
        unreachable!("injections of a coproduct are jointly surjective")
    }
}

pub fn coproduct(family: &[FinSetObj]) -> Coproduct {
    let mut rows: Vec<(String, usize, usize)> = Vec::new();
    for (t, set) in family.iter().enumerate() {
        for (i, x) in set.iter().enumerate() {
            rows.push((format!("{t}:{x}"), t, i));
        }
    }
    rows.sort();
    let mut tables: Vec<Vec<usize>> = family.iter().map(|s| vec![0; s.len()]).collect();
    let mut labels = Vec::with_capacity(rows.len());
    for (k, (label, t, i)) in rows.into_iter().enumerate() {
        tables[t][i] = k;
        labels.push(label);
    }
    let obj = FinSetObj::from_generated(labels);
    let injections = tables
        .into_iter()
        .zip(family)
        .map(|(t, s)| FinMap::from_table(s.clone(), obj.clone(), t))
        .collect();
    Coproduct { obj, injections }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(labels: &[&str]) -> FinSetObj {
        FinSetObj::new(labels.iter().copied()).unwrap()
    }

    fn map(dom: &FinSetObj, cod: &FinSetObj, pairs: &[(&str, &str)]) -> FinMap {
        FinMap::new(dom.clone(), cod.clone(), pairs.iter().copied()).unwrap()
    }

    #[test]
    fn labels_are_sorted_and_distinct() {
        let s = set(&["b", "a", "c"]);
        assert_eq!(s.labels(), &["a", "b", "c"]);
        assert_eq!(FinSetObj::new(["a", "a"]), Err(FinSetError::DuplicateLabel("a".into())));
        assert!(matches!(FinSetObj::new(["a,b"]), Err(FinSetError::MalformedLabel(_))));
        assert!(FinSetObj::new(["{x,y}", "(1,2)"]).is_ok());
    }

    #[test]
    fn partial_assignment_is_rejected() {
        let a = set(&["a", "b"]);
        let b = set(&["x"]);
        assert_eq!(FinMap::new(a, b, [("a", "x")]), Err(FinSetError::Undefined("b".into())));
    }

    #[test]
    fn equalizer_of_identity_pair_is_everything() {
        let a = set(&["a", "b"]);
        let id = FinMap::identity(&a);
        let (e, incl) = equalizer(&id, &id).unwrap();
        assert_eq!(e, a);
        assert_eq!(incl, FinMap::identity(&a));
    }

    #[test]
    fn equalizer_keeps_agreement_points() {
        let a = set(&["a", "b"]);
        let c = set(&["x", "y"]);
        let f = map(&a, &c, &[("a", "x"), ("b", "x")]);
        let g = map(&a, &c, &[("a", "x"), ("b", "y")]);
        let (e, incl) = equalizer(&f, &g).unwrap();
        assert_eq!(e, set(&["a"]));
        assert_eq!(f.after(&incl).unwrap(), g.after(&incl).unwrap());
    }

    #[test]
    fn equalizer_can_be_empty() {
        let a = set(&["a"]);
        let c = set(&["x", "y"]);
        let f = map(&a, &c, &[("a", "x")]);
        let g = map(&a, &c, &[("a", "y")]);
        let (e, incl) = equalizer(&f, &g).unwrap();
        assert!(e.is_empty());
        assert_eq!(incl.table().len(), 0);
    }

    #[test]
    fn equalizer_rejects_non_parallel_pairs() {
        let a = set(&["a"]);
        let c = set(&["x"]);
        let d = set(&["y"]);
        let f = map(&a, &c, &[("a", "x")]);
        let g = map(&a, &d, &[("a", "y")]);
        assert!(matches!(equalizer(&f, &g), Err(FinSetError::DomainMismatch(_))));
        assert!(matches!(coequalizer(&f, &g), Err(FinSetError::DomainMismatch(_))));
    }

    #[test]
    fn coequalizer_of_equal_pair_is_identity() {
        let a = set(&["a"]);
        let c = set(&["x", "y"]);
        let f = map(&a, &c, &[("a", "x")]);
        let (q, quo) = coequalizer(&f, &f).unwrap();
        assert_eq!(q, c);
        assert!(quo.is_bijective());
    }

    #[test]
    fn coequalizer_merges_and_names_by_least_member() {
        let a = set(&["a"]);
        let c = set(&["x", "y", "z"]);
        let f = map(&a, &c, &[("a", "y")]);
        let g = map(&a, &c, &[("a", "x")]);
        let (q, quo) = coequalizer(&f, &g).unwrap();
        assert_eq!(q, set(&["x", "z"]));
        assert_eq!(quo.apply_label("y"), Some("x"));
        assert_eq!(quo.apply_label("z"), Some("z"));
    }

    #[test]
    fn coequalizer_closes_transitively() {
        let a = set(&["p", "q"]);
        let c = set(&["x", "y", "z"]);
        let f = map(&a, &c, &[("p", "x"), ("q", "y")]);
        let g = map(&a, &c, &[("p", "y"), ("q", "z")]);
        let (q, quo) = coequalizer(&f, &g).unwrap();
        assert_eq!(q.len(), 1);
        assert!(quo.is_surjective());
    }

    #[test]
    fn products_have_the_right_size() {
        let a = set(&["a"]);
        let b = set(&["b"]);
        assert_eq!(product(&a, &b).obj, set(&["(a,b)"]));
        assert_eq!(product(&FinSetObj::range(2), &FinSetObj::range(3)).obj.len(), 6);
        assert!(product(&FinSetObj::range(2), &FinSetObj::empty()).obj.is_empty());
    }

    #[test]
    fn product_pair_lookup_matches_projections() {
        let p = product(&FinSetObj::range(3), &set(&["u", "v"]));
        for i in 0..3 {
            for j in 0..2 {
                let k = p.pair(i, j);
                assert_eq!((p.proj1.apply(k), p.proj2.apply(k)), (i, j));
            }
        }
    }

    #[test]
    fn pullback_along_identity_is_the_other_leg() {
        let a = set(&["a", "b", "c"]);
        let c = set(&["x", "y"]);
        let f = map(&a, &c, &[("a", "x"), ("b", "y"), ("c", "y")]);
        let (p, p1, _) = pullback(&f, &FinMap::identity(&c)).unwrap();
        assert_eq!(p.len(), a.len());
        assert!(p1.is_bijective());
    }

    #[test]
    fn pullback_of_constant_maps_is_full_product() {
        let a = set(&["a", "b"]);
        let b = set(&["c", "d", "e"]);
        let c = set(&["x", "y"]);
        let f = FinMap::from_indices(a.clone(), c.clone(), vec![0, 0]).unwrap();
        let g = FinMap::from_indices(b.clone(), c.clone(), vec![0, 0, 0]).unwrap();
        assert_eq!(pullback(&f, &g).unwrap().0.len(), 6);
        let h = FinMap::from_indices(b, c, vec![1, 1, 1]).unwrap();
        assert!(pullback(&f, &h).unwrap().0.is_empty());
    }

    #[test]
    fn coproduct_sizes_add() {
        let one = coproduct(&[set(&["a", "b"])]);
        assert_eq!(one.obj.len(), 2);
        assert!(one.injections[0].is_bijective());
        let two = coproduct(&[FinSetObj::range(2), FinSetObj::range(3)]);
        assert_eq!(two.obj.len(), 5);
        assert!(coproduct(&[]).obj.is_empty());
        assert_eq!(two.locate(two.injections[1].apply(2)), (1, 2));
    }

    #[test]
    fn empty_tuple_product_is_a_point() {
        let p = product_n(&[]);
        assert_eq!(p.obj, FinSetObj::singleton("()"));
    }

    #[test]
    fn tuple_product_lookup() {
        let sets = [FinSetObj::range(2), set(&["a", "b", "c"]), FinSetObj::range(2)];
        let p = product_n(&sets);
        assert_eq!(p.obj.len(), 12);
        let k = p.tuple(&[1, 2, 0]);
        assert_eq!(p.obj.label(k), "(1,c,0)");
        assert_eq!(p.components(k), vec![1, 2, 0]);
    }

    #[test]
    fn all_maps_counts() {
        assert_eq!(FinMap::all(&FinSetObj::range(2), &FinSetObj::range(3)).count(), 9);
        assert_eq!(FinMap::all(&FinSetObj::empty(), &FinSetObj::empty()).count(), 1);
        assert_eq!(FinMap::all(&FinSetObj::range(1), &FinSetObj::empty()).count(), 0);
    }
}
