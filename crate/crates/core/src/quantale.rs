//! Finite quantales: parsing from tables, exhaustive law validation,
//! classification, and a catalogue of standard examples.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::finset::{is_valid_label, split_top_level, tuple_label};

/// Cap on recorded witnesses per law, so reports on badly broken tables stay small.
const WITNESS_CAP: usize = 16;

/// Structural problems that prevent a table from even being checked.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("no elements declared")]
    Empty,
    #[error("malformed element label `{0}`")]
    MalformedLabel(String),
    #[error("element `{0}` declared twice")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("multiplication key `{0}` is not of the form `a,b`")]
    BadMulKey(String),
    #[error("multiplication table is missing `{0},{1}`")]
    MissingProduct(String, String),
    #[error("multiplication table defines `{0},{1}` twice")]
    DuplicateProduct(String, String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuantaleError {
    #[error("unsupported parameter {param} for {name}: {reason}")]
    UnsupportedParam { name: String, param: usize, reason: String },
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Invalid(ValidationReport),
}

/// On-disk form: `{"elements":[..], "leq":[[a,b],..], "mul":{"a,b":"c"}, "unit":".."}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantaleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub elements: Vec<String>,
    #[serde(default)]
    pub leq: Vec<(String, String)>,
    pub mul: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

/// A carrier with an order and a multiplication, not yet known to be a quantale.
///
/// The order is the reflexive-transitive closure of the generating pairs.
#[derive(Debug, Clone)]
pub struct RawQuantale {
    name: String,
    elements: Vec<String>,
    leq: Vec<bool>,
    mul: Vec<usize>,
    unit: Option<usize>,
}

impl RawQuantale {
    pub fn from_spec(spec: &QuantaleSpec) -> Result<Self, SpecError> {
        if spec.elements.is_empty() {
            return Err(SpecError::Empty);
        }
        let mut index = HashMap::new();
        for (i, e) in spec.elements.iter().enumerate() {
            if !is_valid_label(e) {
                return Err(SpecError::MalformedLabel(e.clone()));
            }
            if index.insert(e.as_str(), i).is_some() {
                return Err(SpecError::DuplicateElement(e.clone()));
            }
        }
        let lookup = |s: &str| {
            index
                .get(s.trim())
                .copied()
                .ok_or_else(|| SpecError::UnknownElement(s.to_string()))
        };
        let n = spec.elements.len();
        let mut pairs = Vec::with_capacity(spec.leq.len());
        for (a, b) in &spec.leq {
            pairs.push((lookup(a)?, lookup(b)?));
        }
        let mut mul = vec![usize::MAX; n * n];
        for (key, value) in &spec.mul {
            let parts = split_top_level(key);
            if parts.len() != 2 {
                return Err(SpecError::BadMulKey(key.clone()));
            }
            let (a, b) = (lookup(parts[0])?, lookup(parts[1])?);
            if mul[a * n + b] != usize::MAX {
                return Err(SpecError::DuplicateProduct(
                    spec.elements[a].clone(),
                    spec.elements[b].clone(),
                ));
            }
            mul[a * n + b] = lookup(value)?;
        }
        if let Some(k) = mul.iter().position(|&c| c == usize::MAX) {
            return Err(SpecError::MissingProduct(
                spec.elements[k / n].clone(),
                spec.elements[k % n].clone(),
            ));
        }
        let unit = spec.unit.as_deref().map(lookup).transpose()?;
        let name = spec.name.clone().unwrap_or_else(|| "custom".to_string());
        Ok(Self::from_parts(name, spec.elements.clone(), &pairs, mul, unit))
    }

    /// Builds from index data; `pairs` generate the order.
    pub fn from_parts(
        name: String,
        elements: Vec<String>,
        pairs: &[(usize, usize)],
        mul: Vec<usize>,
        unit: Option<usize>,
    ) -> Self {
        let n = elements.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for &(a, b) in pairs {
            leq[a * n + b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        RawQuantale {
            name,
            elements,
            leq,
            mul,
            unit,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.len() + b]
    }

    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    /// Overwrites one multiplication entry; used to build mutants.
    pub fn set_mul(&mut self, a: usize, b: usize, c: usize) {
        let n = self.len();
        self.mul[a * n + b] = c;
    }

    /// Least upper bound of a subset, if one exists.
    pub fn sup(&self, subset: &[usize]) -> Option<usize> {
        let n = self.len();
        let uppers: Vec<usize> = (0..n).filter(|&u| subset.iter().all(|&s| self.leq(s, u))).collect();
        uppers.iter().copied().find(|&u| uppers.iter().all(|&v| self.leq(u, v)))
    }

    fn label_all(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| self.elements[i].clone()).collect()
    }

    /// Exhaustively checks the quantale laws.
    pub fn validate(&self) -> Result<Quantale, ValidationReport> {
        let n = self.len();
        let mut report = ValidationReport::default();
        for a in 0..n {
            for b in (a + 1)..n {
                if self.leq(a, b) && self.leq(b, a) {
                    report.push(LawViolation::NotAPoset {
                        a: self.elements[a].clone(),
                        b: self.elements[b].clone(),
                    });
                }
            }
        }
        if !report.is_empty() {
            return Err(report);
        }
        let mut join = vec![0; n * n];
        let bottom = self.sup(&[]);
        if bottom.is_none() {
            report.push(LawViolation::NotComplete { subset: Vec::new() });
        }
        for a in 0..n {
            for b in 0..n {
                match self.sup(&[a, b]) {
                    Some(j) => join[a * n + b] = j,
                    None => {
                        if a < b {
                            report.push(LawViolation::NotComplete {
                                subset: self.label_all(&[a, b]),
                            })
                        }
                    }
                }
            }
        }
        if !report.is_empty() {
            return Err(report);
        }
        let bottom = bottom.expect("checked above");
        let j = |a: usize, b: usize| join[a * n + b];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        report.push(LawViolation::NotAssociative {
                            a: self.elements[a].clone(),
                            b: self.elements[b].clone(),
                            c: self.elements[c].clone(),
                        });
                    }
                }
            }
        }
        for a in 0..n {
            if self.mul(a, bottom) != bottom {
                report.push(LawViolation::NotDistributive {
                    a: self.elements[a].clone(),
                    subset: Vec::new(),
                    side: Side::Left,
                });
            }
            if self.mul(bottom, a) != bottom {
                report.push(LawViolation::NotDistributive {
                    a: self.elements[a].clone(),
                    subset: Vec::new(),
                    side: Side::Right,
                });
            }
            for b in 0..n {
                for c in (b + 1)..n {
                    if self.mul(a, j(b, c)) != j(self.mul(a, b), self.mul(a, c)) {
                        report.push(LawViolation::NotDistributive {
                            a: self.elements[a].clone(),
                            subset: self.label_all(&[b, c]),
                            side: Side::Left,
                        });
                    }
                    if self.mul(j(b, c), a) != j(self.mul(b, a), self.mul(c, a)) {
                        report.push(LawViolation::NotDistributive {
                            a: self.elements[a].clone(),
                            subset: self.label_all(&[b, c]),
                            side: Side::Right,
                        });
                    }
                }
            }
        }
        if let Some(u) = self.unit {
            for a in 0..n {
                if self.mul(a, u) != a || self.mul(u, a) != a {
                    report.push(LawViolation::UnitLawFails {
                        u: self.elements[a].clone(),
                    });
                }
            }
        }
        if !report.is_empty() {
            return Err(report);
        }
        let mut meet = vec![0; n * n];
        for a in 0..n {
            for b in 0..n {
                let lowers: Vec<usize> = (0..n).filter(|&l| self.leq(l, a) && self.leq(l, b)).collect();
                meet[a * n + b] = self.sup(&lowers).expect("a finite lattice has all meets");
            }
        }
        let top = self.sup(&(0..n).collect::<Vec<_>>()).expect("complete");
        Ok(Quantale {
            name: self.name.clone(),
            index: self.elements.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect(),
            elements: self.elements.clone(),
            leq: self.leq.clone(),
            join,
            meet,
            mul: self.mul.clone(),
            unit: self.unit,
            top,
            bottom,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A single failed law, with the elements that witness the failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LawViolation {
    NotAPoset { a: String, b: String },
    NotComplete { subset: Vec<String> },
    NotAssociative { a: String, b: String, c: String },
    NotDistributive { a: String, subset: Vec<String>, side: Side },
    UnitLawFails { u: String },
}

impl LawViolation {
    pub fn kind(&self) -> &'static str {
        match self {
            LawViolation::NotAPoset { .. } => "not_a_poset",
            LawViolation::NotComplete { .. } => "not_complete",
            LawViolation::NotAssociative { .. } => "not_associative",
            LawViolation::NotDistributive { .. } => "not_distributive",
            LawViolation::UnitLawFails { .. } => "unit_law_fails",
        }
    }
}

impl fmt::Display for LawViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawViolation::NotAPoset { a, b } => write!(f, "order is not antisymmetric: {a} ≤ {b} ≤ {a}"),
            LawViolation::NotComplete { subset } => write!(f, "no least upper bound for {{{}}}", subset.join(", ")),
            LawViolation::NotAssociative { a, b, c } => {
                write!(f, "({a}⊙{b})⊙{c} ≠ {a}⊙({b}⊙{c})")
            }
            LawViolation::NotDistributive { a, subset, side } => write!(
                f,
                "{a} does not distribute on the {} over the join of {{{}}}",
                match side {
                    Side::Left => "left",
                    Side::Right => "right",
                },
                subset.join(", ")
            ),
            LawViolation::UnitLawFails { u } => write!(f, "unit law fails at {u}"),
        }
    }
}

/// Every violated law with up to a fixed number of witnesses per law.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<LawViolation>,
    pub suppressed: BTreeMap<String, usize>,
}

impl ValidationReport {
    fn push(&mut self, v: LawViolation) {
        let kind = v.kind();
        if self.violations.iter().filter(|w| w.kind() == kind).count() < WITNESS_CAP {
            self.violations.push(v);
        } else {
            *self.suppressed.entry(kind.to_string()).or_default() += 1;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        for (kind, count) in &self.suppressed {
            write!(f, "\n... {count} more {kind} witnesses")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

/// Which structural properties a quantale has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantaleFlags {
    pub commutative: bool,
    pub idempotent: bool,
    pub right_sided: bool,
    pub semicartesian: bool,
    pub integral: bool,
    pub unital: bool,
    pub locale: bool,
}

/// A validated finite quantale. Elements are addressed by index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quantale {
    name: String,
    elements: Vec<String>,
    index: BTreeMap<String, usize>,
    leq: Vec<bool>,
    join: Vec<usize>,
    meet: Vec<usize>,
    mul: Vec<usize>,
    unit: Option<usize>,
    top: usize,
    bottom: usize,
}

impl Quantale {
    pub fn from_spec(spec: &QuantaleSpec) -> Result<Self, QuantaleError> {
        RawQuantale::from_spec(spec)?.validate().map_err(QuantaleError::Invalid)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn label(&self, a: usize) -> &str {
        &self.elements[a]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.len() + b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn join(&self, a: usize, b: usize) -> usize {
        self.join[a * self.len() + b]
    }

    pub fn meet(&self, a: usize, b: usize) -> usize {
        self.meet[a * self.len() + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.len() + b]
    }

    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn join_all<I: IntoIterator<Item = usize>>(&self, items: I) -> usize {
        items.into_iter().fold(self.bottom, |acc, x| self.join(acc, x))
    }

    /// Elements below `u`, in index order.
    pub fn down(&self, u: usize) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.leq(v, u)).collect()
    }

    /// Elements sorted so that every element precedes those below it.
    pub fn top_down(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&u| (std::cmp::Reverse(self.down(u).len()), u));
        order
    }

    /// Pairs `(v, u)` with `v` covered by `u` in the order.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut edges = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if self.lt(v, u) && !(0..n).any(|w| self.lt(v, w) && self.lt(w, u)) {
                    edges.push((v, u));
                }
            }
        }
        edges
    }

    pub fn to_raw(&self) -> RawQuantale {
        RawQuantale {
            name: self.name.clone(),
            elements: self.elements.clone(),
            leq: self.leq.clone(),
            mul: self.mul.clone(),
            unit: self.unit,
        }
    }

    pub fn to_spec(&self) -> QuantaleSpec {
        let n = self.len();
        let mut leq = Vec::new();
        for (v, u) in self.hasse_edges() {
            leq.push((self.elements[v].clone(), self.elements[u].clone()));
        }
        let mut mul = BTreeMap::new();
        for a in 0..n {
            for b in 0..n {
                mul.insert(
                    format!("{},{}", self.elements[a], self.elements[b]),
                    self.elements[self.mul(a, b)].clone(),
                );
            }
        }
        QuantaleSpec {
            name: Some(self.name.clone()),
            elements: self.elements.clone(),
            leq,
            mul,
            unit: self.unit.map(|u| self.elements[u].clone()),
        }
    }

    pub fn classify(&self) -> QuantaleFlags {
        let n = self.len();
        let all = |p: &dyn Fn(usize, usize) -> bool| (0..n).all(|a| (0..n).all(|b| p(a, b)));
        let commutative = all(&|a, b| self.mul(a, b) == self.mul(b, a));
        let idempotent = (0..n).all(|a| self.mul(a, a) == a);
        let right_sided = (0..n).all(|a| self.mul(a, self.top) == a);
        let semicartesian = all(&|a, b| self.leq(self.mul(a, b), a) && self.leq(self.mul(a, b), b));
        let unital = self.unit.is_some();
        let integral = self.unit == Some(self.top);
        let locale = all(&|a, b| self.mul(a, b) == self.meet(a, b));
        QuantaleFlags {
            commutative,
            idempotent,
            right_sided,
            semicartesian,
            integral,
            unital,
            locale,
        }
    }

    /// Componentwise product; labels are pairs `(a,b)`, index `a * |other| + b`.
    pub fn product(&self, other: &Quantale) -> Quantale {
        let (n1, n2) = (self.len(), other.len());
        let idx = |a: usize, b: usize| a * n2 + b;
        let mut elements = Vec::with_capacity(n1 * n2);
        for a in 0..n1 {
            for b in 0..n2 {
                elements.push(tuple_label(&[self.label(a), other.label(b)]));
            }
        }
        let mut pairs = Vec::new();
        let mut mul = vec![0; n1 * n2 * n1 * n2];
        for a in 0..n1 {
            for b in 0..n2 {
                for c in 0..n1 {
                    for d in 0..n2 {
                        if self.leq(a, c) && other.leq(b, d) {
                            pairs.push((idx(a, b), idx(c, d)));
                        }
                        mul[idx(a, b) * n1 * n2 + idx(c, d)] = idx(self.mul(a, c), other.mul(b, d));
                    }
                }
            }
        }
        let unit = match (self.unit, other.unit) {
            (Some(u), Some(v)) => Some(idx(u, v)),
            _ => None,
        };
        RawQuantale::from_parts(format!("{}×{}", self.name, other.name), elements, &pairs, mul, unit)
            .validate()
            .expect("a product of quantales is a quantale")
    }

    /// Splits a product-quantale index into its components.
    pub fn unpair(index: usize, right_len: usize) -> (usize, usize) {
        (index / right_len, index % right_len)
    }
}

/// The bundled example families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StandardQuantale {
    PowersetLocale,
    ChainLocale,
    LukasiewiczChain,
    TruncatedNat,
    IdealsZmod,
}

impl StandardQuantale {
    pub const ALL: [StandardQuantale; 5] = [
        StandardQuantale::PowersetLocale,
        StandardQuantale::ChainLocale,
        StandardQuantale::LukasiewiczChain,
        StandardQuantale::TruncatedNat,
        StandardQuantale::IdealsZmod,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StandardQuantale::PowersetLocale => "powerset_locale",
            StandardQuantale::ChainLocale => "chain_locale",
            StandardQuantale::LukasiewiczChain => "lukasiewicz_chain",
            StandardQuantale::TruncatedNat => "truncated_nat",
            StandardQuantale::IdealsZmod => "ideals_zmod",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|q| q.as_str() == s)
    }
}

fn unsupported(name: StandardQuantale, param: usize, reason: &str) -> QuantaleError {
    QuantaleError::UnsupportedParam {
        name: name.as_str().to_string(),
        param,
        reason: reason.to_string(),
    }
}

/// Builds one of the bundled quantales.
pub fn build_standard(name: StandardQuantale, param: usize) -> Result<Quantale, QuantaleError> {
    let raw = match name {
        StandardQuantale::PowersetLocale => {
            if param > 4 {
                return Err(unsupported(name, param, "at most 4 atoms"));
            }
            powerset(param)
        }
        StandardQuantale::ChainLocale => {
            if !(1..=8).contains(&param) {
                return Err(unsupported(name, param, "between 1 and 8 elements"));
            }
            chain(param, |a, b| a.min(b), Some(param - 1), "chain_locale")
        }
        StandardQuantale::LukasiewiczChain => {
            if !(2..=8).contains(&param) {
                return Err(unsupported(name, param, "between 2 and 8 elements"));
            }
            let m = param - 1;
            let mut raw = chain(param, |a, b| (a + b).saturating_sub(m), Some(m), "lukasiewicz_chain");
            raw.elements = (0..param)
                .map(|k| match k {
                    0 => "0".to_string(),
                    k if k == m => "1".to_string(),
                    k if param == 3 && k == 1 => "h".to_string(),
                    k => format!("{k}/{m}"),
                })
                .collect();
            raw
        }
        StandardQuantale::TruncatedNat => {
            if !(1..=8).contains(&param) {
                return Err(unsupported(name, param, "cut-off between 1 and 8"));
            }
            truncated_nat(param)
        }
        StandardQuantale::IdealsZmod => {
            if !(1..=64).contains(&param) {
                return Err(unsupported(name, param, "modulus between 1 and 64"));
            }
            ideals_zmod(param)
        }
    };
    let mut q = raw.validate().map_err(QuantaleError::Invalid)?;
    q.name = format!("{}({param})", name.as_str());
    Ok(q)
}

fn chain(n: usize, mul: impl Fn(usize, usize) -> usize, unit: Option<usize>, name: &str) -> RawQuantale {
    let pairs: Vec<(usize, usize)> = (1..n).map(|k| (k - 1, k)).collect();
    let table = (0..n * n).map(|k| mul(k / n, k % n)).collect();
    RawQuantale::from_parts(
        name.to_string(),
        (0..n).map(|k| k.to_string()).collect(),
        &pairs,
        table,
        unit,
    )
}

const ATOMS: [&str; 4] = ["x", "y", "z", "w"];

fn powerset(atoms: usize) -> RawQuantale {
    let n = 1usize << atoms;
    let mut masks: Vec<usize> = (0..n).collect();
    masks.sort_by_key(|&m| (m.count_ones(), m));
    let label = |m: usize| {
        let names: Vec<&str> = (0..atoms).filter(|b| m >> b & 1 == 1).map(|b| ATOMS[b]).collect();
        format!("{{{}}}", names.join(","))
    };
    let pos: HashMap<usize, usize> = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut pairs = Vec::new();
    let mut mul = vec![0; n * n];
    for (i, &a) in masks.iter().enumerate() {
        for (j, &b) in masks.iter().enumerate() {
            if a & b == a {
                pairs.push((i, j));
            }
            mul[i * n + j] = pos[&(a & b)];
        }
    }
    RawQuantale::from_parts(
        "powerset_locale".to_string(),
        masks.iter().map(|&m| label(m)).collect(),
        &pairs,
        mul,
        Some(pos[&(n - 1)]),
    )
}

fn truncated_nat(cut: usize) -> RawQuantale {
    let n = cut + 1;
    // Order is reversed: larger numbers sit lower.
    let pairs: Vec<(usize, usize)> = (1..n).map(|k| (k, k - 1)).collect();
    let table = (0..n * n).map(|k| (k / n + k % n).min(cut)).collect();
    RawQuantale::from_parts(
        "truncated_nat".to_string(),
        (0..n).map(|k| k.to_string()).collect(),
        &pairs,
        table,
        Some(0),
    )
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn ideals_zmod(modulus: usize) -> RawQuantale {
    // The ideal (d) for each divisor d; (modulus) is the zero ideal.
    let divisors: Vec<usize> = (1..=modulus).filter(|d| modulus.is_multiple_of(*d)).collect();
    let n = divisors.len();
    let pos = |d: usize| divisors.iter().position(|&x| x == d).expect("divisor");
    let mut pairs = Vec::new();
    let mut mul = vec![0; n * n];
    for (i, &d) in divisors.iter().enumerate() {
        for (j, &e) in divisors.iter().enumerate() {
            if d % e == 0 {
                pairs.push((i, j));
            }
            mul[i * n + j] = pos(gcd(d * e, modulus));
        }
    }
    let labels = divisors
        .iter()
        .map(|&d| {
            if d == modulus {
                "(0)".to_string()
            } else {
                format!("({d})")
            }
        })
        .collect();
    RawQuantale::from_parts("ideals_zmod".to_string(), labels, &pairs, mul, Some(pos(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn luk3() -> Quantale {
        build_standard(StandardQuantale::LukasiewiczChain, 3).unwrap()
    }

    /// Oracle: distributivity over every subset, both sides.
    fn distributes_over_all_subsets(q: &Quantale) -> bool {
        let n = q.len();
        (0..(1u32 << n)).all(|mask| {
            let subset: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let j = q.join_all(subset.iter().copied());
            (0..n).all(|a| {
                q.mul(a, j) == q.join_all(subset.iter().map(|&b| q.mul(a, b)))
                    && q.mul(j, a) == q.join_all(subset.iter().map(|&b| q.mul(b, a)))
            })
        })
    }

    #[test]
    fn powerset_of_two_is_a_locale() {
        let q = build_standard(StandardQuantale::PowersetLocale, 2).unwrap();
        assert_eq!(q.len(), 4);
        let f = q.classify();
        assert!(f.commutative && f.idempotent && f.semicartesian && f.integral && f.locale);
        assert!(distributes_over_all_subsets(&q));
    }

    #[test]
    fn lukasiewicz_three_chain() {
        let q = luk3();
        let h = q.index_of("h").unwrap();
        assert_eq!(q.label(q.mul(h, h)), "0");
        let f = q.classify();
        assert!(!f.idempotent && f.semicartesian && f.integral && f.commutative && !f.locale);
        assert!(distributes_over_all_subsets(&q));
    }

    #[test]
    fn broken_associativity_is_reported() {
        let q = build_standard(StandardQuantale::TruncatedNat, 3).unwrap();
        let mut raw = q.to_raw();
        raw.set_mul(1, 2, 2);
        let report = raw.validate().unwrap_err();
        assert!(report.violations.contains(&LawViolation::NotAssociative {
            a: "1".into(),
            b: "1".into(),
            c: "1".into(),
        }));
    }

    #[test]
    fn truncated_nat_three() {
        let q = build_standard(StandardQuantale::TruncatedNat, 3).unwrap();
        assert_eq!(q.elements(), &["0", "1", "2", "3"]);
        let (one, two, three) = (1, 2, 3);
        assert!(q.leq(three, one));
        assert_eq!(q.mul(one, two), three);
        assert_eq!(q.mul(one, one), two);
        assert_eq!(q.unit(), Some(0));
        assert_eq!(q.top(), 0);
        let f = q.classify();
        assert!(f.commutative && !f.idempotent && f.semicartesian);
    }

    #[test]
    fn ideals_of_z4() {
        let q = build_standard(StandardQuantale::IdealsZmod, 4).unwrap();
        assert_eq!(q.len(), 3);
        let m = q.index_of("(2)").unwrap();
        assert_eq!(q.label(q.mul(m, m)), "(0)");
        assert_eq!(q.label(q.top()), "(1)");
        assert_eq!(q.label(q.bottom()), "(0)");
    }

    #[test]
    fn ideals_of_z12_against_ring_arithmetic() {
        let q = build_standard(StandardQuantale::IdealsZmod, 12).unwrap();
        assert_eq!(q.len(), 6);
        // Oracle: an ideal is the set of its multiples mod 12.
        let ideal = |label: &str| -> Vec<usize> {
            let d: usize = label.trim_matches(|c| c == '(' || c == ')').parse().unwrap();
            let d = if d == 0 { 12 } else { d };
            (0..12).filter(|x| x % d == 0).collect()
        };
        for a in 0..q.len() {
            for b in 0..q.len() {
                let (ia, ib) = (ideal(q.label(a)), ideal(q.label(b)));
                let mut prod: Vec<usize> = ia.iter().flat_map(|x| ib.iter().map(move |y| x * y % 12)).collect();
                prod.sort();
                prod.dedup();
                // Ideal generated by the products: closed under addition.
                let mut gen = prod.clone();
                loop {
                    let mut next = gen.clone();
                    for x in &gen {
                        for y in &gen {
                            next.push((x + y) % 12);
                        }
                    }
                    next.sort();
                    next.dedup();
                    if next == gen {
                        break;
                    }
                    gen = next;
                }
                assert_eq!(ideal(q.label(q.mul(a, b))), gen);
                assert_eq!(q.leq(a, b), ia.iter().all(|x| ib.contains(x)));
            }
        }
    }

    #[test]
    fn powerset_of_one_is_two_chain() {
        let q = build_standard(StandardQuantale::PowersetLocale, 1).unwrap();
        assert_eq!(q.len(), 2);
        assert!(q.leq(0, 1) && !q.leq(1, 0));
    }

    #[test]
    fn unsupported_parameters() {
        assert!(matches!(
            build_standard(StandardQuantale::ChainLocale, 0),
            Err(QuantaleError::UnsupportedParam { .. })
        ));
        assert!(build_standard(StandardQuantale::PowersetLocale, 5).is_err());
    }

    #[test]
    fn spec_roundtrip() {
        let q = luk3();
        let back = Quantale::from_spec(&q.to_spec()).unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn partial_table_is_rejected() {
        let mut spec = luk3().to_spec();
        spec.mul.remove("h,h");
        assert_eq!(
            RawQuantale::from_spec(&spec).unwrap_err(),
            SpecError::MissingProduct("h".into(), "h".into())
        );
    }

    #[test]
    fn non_lattice_is_not_complete() {
        // Two incomparable elements with no bottom.
        let raw = RawQuantale::from_parts("v".into(), vec!["a".into(), "b".into()], &[], vec![0, 0, 0, 1], None);
        let report = raw.validate().unwrap_err();
        assert!(report.has("not_complete"));
    }

    #[test]
    fn product_quantale_is_componentwise() {
        let a = build_standard(StandardQuantale::ChainLocale, 2).unwrap();
        let b = luk3();
        let p = a.product(&b);
        assert_eq!(p.len(), 6);
        assert_eq!(p.label(p.unit().unwrap()), "(1,1)");
        let f = p.classify();
        assert!(f.semicartesian && !f.locale && f.integral);
    }
}
