use serde::{Deserialize, Serialize};

use super::{MonCatError, MonoidalCategory};
use crate::finset::{self, tuple_label, FinMap, FinSetObj};

/// Deliberate breakages for mutation testing of the coherence suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Defect {
    /// `b_{A,A}` is the identity instead of the swap.
    SwappedBraiding,
    /// The associator is followed by a cyclic shift of its codomain.
    TwistedAssociator,
    /// `λ` is followed by a cyclic shift; the instance also drops its braiding.
    ShiftedLeftUnitor,
    /// `ρ` is followed by a cyclic shift.
    ShiftedRightUnitor,
    /// `f ⊗ g` shifts its first output by the index of the second input; no braiding.
    SkewedTensor,
}

impl Defect {
    pub const ALL: [Defect; 5] = [
        Defect::SwappedBraiding,
        Defect::TwistedAssociator,
        Defect::ShiftedLeftUnitor,
        Defect::ShiftedRightUnitor,
        Defect::SkewedTensor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Defect::SwappedBraiding => "swapped_braiding",
            Defect::TwistedAssociator => "twisted_associator",
            Defect::ShiftedLeftUnitor => "shifted_left_unitor",
            Defect::ShiftedRightUnitor => "shifted_right_unitor",
            Defect::SkewedTensor => "skewed_tensor",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.as_str() == s)
    }
}

/// Finite sets with the cartesian product as tensor and `{*}` as unit.
///
/// Every finite set is an object; `objects` returns the canonical sets
/// `{0..n-1}` for `n ≤ bound`.
#[derive(Debug, Clone)]
pub struct FinSetCat {
    bound: usize,
    defect: Option<Defect>,
    point: FinSetObj,
}

impl FinSetCat {
    pub fn new(bound: usize) -> Self {
        FinSetCat {
            bound,
            defect: None,
            point: FinSetObj::singleton("*"),
        }
    }

    pub fn with_defect(bound: usize, defect: Defect) -> Self {
        FinSetCat {
            defect: Some(defect),
            ..Self::new(bound)
        }
    }

    pub fn defect(&self) -> Option<Defect> {
        self.defect
    }

    fn shifted(&self, f: FinMap) -> FinMap {
        let n = f.cod().len();
        if n < 2 {
            return f;
        }
        let table = f.table().iter().map(|&j| (j + 1) % n).collect();
        FinMap::from_table(f.dom().clone(), f.cod().clone(), table)
    }

    /// Builds a map `dom → cod` from a label function.
    fn by_label(dom: &FinSetObj, cod: &FinSetObj, rule: impl Fn(&str) -> String) -> FinMap {
        let table = dom
            .iter()
            .map(|x| {
                let y = rule(x);
                cod.index_of(&y)
                    .unwrap_or_else(|| panic!("structure map sends {x} outside its codomain ({y})"))
            })
            .collect();
        FinMap::from_table(dom.clone(), cod.clone(), table)
    }
}

/// Splits a pair label `(a,b)` produced by the tensor.
fn unpair(label: &str) -> (&str, &str) {
    let inner = &label[1..label.len() - 1];
    let parts = finset::split_top_level(inner);
    debug_assert_eq!(parts.len(), 2, "not a pair label: {label}");
    (parts[0], parts[1])
}

impl MonoidalCategory for FinSetCat {
    type Obj = FinSetObj;
    type Mor = FinMap;

    fn name(&self) -> String {
        match self.defect {
            None => format!("finset(≤{})", self.bound),
            Some(d) => format!("finset(≤{}, {})", self.bound, d.as_str()),
        }
    }

    fn objects(&self) -> Vec<FinSetObj> {
        (0..=self.bound).map(FinSetObj::range).collect()
    }

    fn describe(&self, a: &FinSetObj) -> String {
        a.to_string()
    }

    fn size_bound(&self) -> Option<usize> {
        Some(self.bound)
    }

    fn hom(&self, a: &FinSetObj, b: &FinSetObj) -> Vec<FinMap> {
        FinMap::all(a, b).collect()
    }

    fn dom(&self, f: &FinMap) -> FinSetObj {
        f.dom().clone()
    }

    fn cod(&self, f: &FinMap) -> FinSetObj {
        f.cod().clone()
    }

    fn id(&self, a: &FinSetObj) -> FinMap {
        FinMap::identity(a)
    }

    fn compose(&self, g: &FinMap, f: &FinMap) -> Result<FinMap, MonCatError> {
        g.after(f).map_err(|e| MonCatError::Composition(e.to_string()))
    }

    fn tensor(&self, a: &FinSetObj, b: &FinSetObj) -> FinSetObj {
        finset::product(a, b).obj
    }

    fn tensor_mor(&self, f: &FinMap, g: &FinMap) -> FinMap {
        let src = finset::product(f.dom(), g.dom());
        let dst = finset::product(f.cod(), g.cod());
        let skew = self.defect == Some(Defect::SkewedTensor) && f.cod().len() > 1;
        let table = (0..src.obj.len())
            .map(|k| {
                let (x, y) = (src.proj1.apply(k), src.proj2.apply(k));
                let fx = if skew {
                    (f.apply(x) + y) % f.cod().len()
                } else {
                    f.apply(x)
                };
                dst.pair(fx, g.apply(y))
            })
            .collect();
        FinMap::from_table(src.obj, dst.obj, table)
    }

    fn unit(&self) -> FinSetObj {
        self.point.clone()
    }

    fn associator(&self, a: &FinSetObj, b: &FinSetObj, c: &FinSetObj) -> FinMap {
        let dom = self.tensor(&self.tensor(a, b), c);
        let cod = self.tensor(a, &self.tensor(b, c));
        let f = Self::by_label(&dom, &cod, |l| {
            let (ab, z) = unpair(l);
            let (x, y) = unpair(ab);
            tuple_label(&[x, &tuple_label(&[y, z])])
        });
        match self.defect {
            Some(Defect::TwistedAssociator) => self.shifted(f),
            _ => f,
        }
    }

    fn left_unitor(&self, a: &FinSetObj) -> FinMap {
        let dom = self.tensor(&self.point, a);
        let f = Self::by_label(&dom, a, |l| unpair(l).1.to_string());
        match self.defect {
            Some(Defect::ShiftedLeftUnitor) => self.shifted(f),
            _ => f,
        }
    }

    fn right_unitor(&self, a: &FinSetObj) -> FinMap {
        let dom = self.tensor(a, &self.point);
        let f = Self::by_label(&dom, a, |l| unpair(l).0.to_string());
        match self.defect {
            Some(Defect::ShiftedRightUnitor) => self.shifted(f),
            _ => f,
        }
    }

    fn braiding(&self, a: &FinSetObj, b: &FinSetObj) -> Option<FinMap> {
        match self.defect {
            Some(Defect::ShiftedLeftUnitor | Defect::SkewedTensor) => None,
            Some(Defect::SwappedBraiding) if a == b => Some(FinMap::identity(&self.tensor(a, b))),
            _ => {
                let dom = self.tensor(a, b);
                let cod = self.tensor(b, a);
                Some(Self::by_label(&dom, &cod, |l| {
                    let (x, y) = unpair(l);
                    tuple_label(&[y, x])
                }))
            }
        }
    }

    fn terminal(&self, a: &FinSetObj) -> Option<FinMap> {
        Some(FinMap::to_point(a, &self.point))
    }

    fn equalizer(&self, f: &FinMap, g: &FinMap) -> Result<(FinSetObj, FinMap), MonCatError> {
        finset::equalizer(f, g).map_err(|e| MonCatError::NotParallel(e.to_string()))
    }

    fn lifts(&self, constraints: &[(FinMap, FinMap)], limit: usize) -> Vec<FinMap> {
        let Some((m0, h0)) = constraints.first() else {
            return Vec::new();
        };
        let (src, dst) = (h0.dom().clone(), m0.dom().clone());
        if constraints
            .iter()
            .any(|(m, h)| m.dom() != &dst || h.dom() != &src || m.cod() != h.cod())
        {
            return Vec::new();
        }
        // Each point may go anywhere in the joint fibre over its images.
        let fibres: Vec<Vec<usize>> = (0..src.len())
            .map(|x| {
                (0..dst.len())
                    .filter(|&y| constraints.iter().all(|(m, h)| m.apply(y) == h.apply(x)))
                    .collect()
            })
            .collect();
        if fibres.iter().any(Vec::is_empty) {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut choice = vec![0usize; src.len()];
        loop {
            let table = choice.iter().zip(&fibres).map(|(&c, f)| f[c]).collect();
            out.push(FinMap::from_table(src.clone(), dst.clone(), table));
            if out.len() >= limit {
                return out;
            }
            let mut k = choice.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                choice[k] += 1;
                if choice[k] < fibres[k].len() {
                    break;
                }
                choice[k] = 0;
            }
        }
    }

    fn pullback(&self, f: &FinMap, g: &FinMap) -> Option<(FinSetObj, FinMap, FinMap)> {
        finset::pullback(f, g).ok()
    }

    fn is_cartesian(&self) -> bool {
        self.defect.is_none()
    }
}
