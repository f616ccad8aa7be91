use std::sync::Arc;

use super::{MonCatError, MonoidalCategory};
use crate::quantale::Quantale;

/// The unique arrow `dom → cod` of a poset, present only when `dom ≤ cod`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThinMor {
    pub dom: usize,
    pub cod: usize,
}

impl ThinMor {
    pub fn new(dom: usize, cod: usize) -> Self {
        ThinMor { dom, cod }
    }
}

/// A unital quantale viewed as a thin monoidal category.
#[derive(Debug, Clone)]
pub struct ThinCat {
    q: Arc<Quantale>,
    unit: usize,
}

impl ThinCat {
    pub fn new(q: Arc<Quantale>) -> Result<Self, MonCatError> {
        let unit = q.unit().ok_or_else(|| MonCatError::NoUnit(q.name().to_string()))?;
        Ok(ThinCat { q, unit })
    }

    pub fn quantale(&self) -> &Arc<Quantale> {
        &self.q
    }
}

impl MonoidalCategory for ThinCat {
    type Obj = usize;
    type Mor = ThinMor;

    fn name(&self) -> String {
        self.q.name().to_string()
    }

    fn objects(&self) -> Vec<usize> {
        (0..self.q.len()).collect()
    }

    fn describe(&self, a: &usize) -> String {
        self.q.label(*a).to_string()
    }

    fn hom(&self, a: &usize, b: &usize) -> Vec<ThinMor> {
        if self.q.leq(*a, *b) {
            vec![ThinMor::new(*a, *b)]
        } else {
            Vec::new()
        }
    }

    fn dom(&self, f: &ThinMor) -> usize {
        f.dom
    }

    fn cod(&self, f: &ThinMor) -> usize {
        f.cod
    }

    fn id(&self, a: &usize) -> ThinMor {
        ThinMor::new(*a, *a)
    }

    fn compose(&self, g: &ThinMor, f: &ThinMor) -> Result<ThinMor, MonCatError> {
        if f.cod != g.dom {
            return Err(MonCatError::Composition(format!(
                "{} ≠ {}",
                self.q.label(f.cod),
                self.q.label(g.dom)
            )));
        }
        Ok(ThinMor::new(f.dom, g.cod))
    }

    fn tensor(&self, a: &usize, b: &usize) -> usize {
        self.q.mul(*a, *b)
    }

    fn tensor_mor(&self, f: &ThinMor, g: &ThinMor) -> ThinMor {
        ThinMor::new(self.q.mul(f.dom, g.dom), self.q.mul(f.cod, g.cod))
    }

    fn unit(&self) -> usize {
        self.unit
    }

    fn associator(&self, a: &usize, b: &usize, c: &usize) -> ThinMor {
        let x = self.tensor(&self.tensor(a, b), c);
        ThinMor::new(x, x)
    }

    fn left_unitor(&self, a: &usize) -> ThinMor {
        ThinMor::new(self.q.mul(self.unit, *a), *a)
    }

    fn right_unitor(&self, a: &usize) -> ThinMor {
        ThinMor::new(self.q.mul(*a, self.unit), *a)
    }

    fn braiding(&self, a: &usize, b: &usize) -> Option<ThinMor> {
        let (ab, ba) = (self.q.mul(*a, *b), self.q.mul(*b, *a));
        self.q.leq(ab, ba).then(|| ThinMor::new(ab, ba)).filter(|_| {
            let n = self.q.len();
            (0..n).all(|x| (0..n).all(|y| self.q.mul(x, y) == self.q.mul(y, x)))
        })
    }

    fn terminal(&self, a: &usize) -> Option<ThinMor> {
        (self.unit == self.q.top()).then(|| ThinMor::new(*a, self.unit))
    }

    fn equalizer(&self, f: &ThinMor, g: &ThinMor) -> Result<(usize, ThinMor), MonCatError> {
        if f != g {
            return Err(MonCatError::NotParallel(format!("{f:?} vs {g:?}")));
        }
        Ok((f.dom, ThinMor::new(f.dom, f.dom)))
    }

    fn lifts(&self, constraints: &[(ThinMor, ThinMor)], limit: usize) -> Vec<ThinMor> {
        let Some((m0, h0)) = constraints.first() else {
            return Vec::new();
        };
        let k = ThinMor::new(h0.dom, m0.dom);
        let ok = limit > 0
            && self.q.leq(k.dom, k.cod)
            && constraints
                .iter()
                .all(|(m, h)| m.dom == k.cod && h.dom == k.dom && m.cod == h.cod);
        if ok {
            vec![k]
        } else {
            Vec::new()
        }
    }

    fn pullback(&self, f: &ThinMor, g: &ThinMor) -> Option<(usize, ThinMor, ThinMor)> {
        if f.cod != g.cod {
            return None;
        }
        let m = self.q.meet(f.dom, g.dom);
        Some((m, ThinMor::new(m, f.dom), ThinMor::new(m, g.dom)))
    }

    fn is_cartesian(&self) -> bool {
        self.q.classify().locale && self.unit == self.q.top()
    }
}
