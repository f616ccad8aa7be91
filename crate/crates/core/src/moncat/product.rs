use super::{MonCatError, MonoidalCategory};

/// The product of two monoidal categories, with everything componentwise.
#[derive(Debug, Clone)]
pub struct ProductCat<C, D> {
    left: C,
    right: D,
}

impl<C: MonoidalCategory, D: MonoidalCategory> ProductCat<C, D> {
    pub fn new(left: C, right: D) -> Self {
        ProductCat { left, right }
    }

    pub fn left(&self) -> &C {
        &self.left
    }

    pub fn right(&self) -> &D {
        &self.right
    }
}

impl<C: MonoidalCategory, D: MonoidalCategory> MonoidalCategory for ProductCat<C, D> {
    type Obj = (C::Obj, D::Obj);
    type Mor = (C::Mor, D::Mor);

    fn name(&self) -> String {
        format!("{}×{}", self.left.name(), self.right.name())
    }

    fn objects(&self) -> Vec<Self::Obj> {
        let rs = self.right.objects();
        self.left
            .objects()
            .into_iter()
            .flat_map(|a| rs.iter().map(move |b| (a.clone(), b.clone())))
            .collect()
    }

    fn describe(&self, a: &Self::Obj) -> String {
        format!("({}, {})", self.left.describe(&a.0), self.right.describe(&a.1))
    }

    fn size_bound(&self) -> Option<usize> {
        self.left.size_bound().or(self.right.size_bound())
    }

    fn hom(&self, a: &Self::Obj, b: &Self::Obj) -> Vec<Self::Mor> {
        let rs = self.right.hom(&a.1, &b.1);
        self.left
            .hom(&a.0, &b.0)
            .into_iter()
            .flat_map(|f| rs.iter().map(move |g| (f.clone(), g.clone())))
            .collect()
    }

    fn dom(&self, f: &Self::Mor) -> Self::Obj {
        (self.left.dom(&f.0), self.right.dom(&f.1))
    }

    fn cod(&self, f: &Self::Mor) -> Self::Obj {
        (self.left.cod(&f.0), self.right.cod(&f.1))
    }

    fn id(&self, a: &Self::Obj) -> Self::Mor {
        (self.left.id(&a.0), self.right.id(&a.1))
    }

    fn compose(&self, g: &Self::Mor, f: &Self::Mor) -> Result<Self::Mor, MonCatError> {
        Ok((self.left.compose(&g.0, &f.0)?, self.right.compose(&g.1, &f.1)?))
    }

    fn tensor(&self, a: &Self::Obj, b: &Self::Obj) -> Self::Obj {
        (self.left.tensor(&a.0, &b.0), self.right.tensor(&a.1, &b.1))
    }

    fn tensor_mor(&self, f: &Self::Mor, g: &Self::Mor) -> Self::Mor {
        (self.left.tensor_mor(&f.0, &g.0), self.right.tensor_mor(&f.1, &g.1))
    }

    fn unit(&self) -> Self::Obj {
        (self.left.unit(), self.right.unit())
    }

    fn associator(&self, a: &Self::Obj, b: &Self::Obj, c: &Self::Obj) -> Self::Mor {
        (
            self.left.associator(&a.0, &b.0, &c.0),
            self.right.associator(&a.1, &b.1, &c.1),
        )
    }

    fn left_unitor(&self, a: &Self::Obj) -> Self::Mor {
        (self.left.left_unitor(&a.0), self.right.left_unitor(&a.1))
    }

    fn right_unitor(&self, a: &Self::Obj) -> Self::Mor {
        (self.left.right_unitor(&a.0), self.right.right_unitor(&a.1))
    }

    fn braiding(&self, a: &Self::Obj, b: &Self::Obj) -> Option<Self::Mor> {
        Some((self.left.braiding(&a.0, &b.0)?, self.right.braiding(&a.1, &b.1)?))
    }

    fn terminal(&self, a: &Self::Obj) -> Option<Self::Mor> {
        Some((self.left.terminal(&a.0)?, self.right.terminal(&a.1)?))
    }

    fn equalizer(&self, f: &Self::Mor, g: &Self::Mor) -> Result<(Self::Obj, Self::Mor), MonCatError> {
        let (a, e) = self.left.equalizer(&f.0, &g.0)?;
        let (b, e2) = self.right.equalizer(&f.1, &g.1)?;
        Ok(((a, b), (e, e2)))
    }

    fn lifts(&self, constraints: &[(Self::Mor, Self::Mor)], limit: usize) -> Vec<Self::Mor> {
        let left: Vec<_> = constraints.iter().map(|(m, h)| (m.0.clone(), h.0.clone())).collect();
        let right: Vec<_> = constraints.iter().map(|(m, h)| (m.1.clone(), h.1.clone())).collect();
        let rs = self.right.lifts(&right, limit);
        if rs.is_empty() {
            return Vec::new();
        }
        self.left
            .lifts(&left, limit)
            .into_iter()
            .flat_map(|l| rs.iter().map(move |r| (l.clone(), r.clone())))
            .take(limit)
            .collect()
    }

    fn pullback(&self, f: &Self::Mor, g: &Self::Mor) -> Option<(Self::Obj, Self::Mor, Self::Mor)> {
        let (a, p, q) = self.left.pullback(&f.0, &g.0)?;
        let (b, r, s) = self.right.pullback(&f.1, &g.1)?;
        Some(((a, b), (p, r), (q, s)))
    }

    fn is_cartesian(&self) -> bool {
        self.left.is_cartesian() && self.right.is_cartesian()
    }
}
