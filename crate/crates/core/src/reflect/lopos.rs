//! The down-set criterion: a complete lattice with an associative
//! multiplication is a quantale exactly when taking suprema commutes with
//! the lifted product of down-sets.

use serde::Serialize;

use crate::quantale::RawQuantale;

use super::ReflectError;

/// Down-set enumeration stops at this many elements.
const ELEMENT_LIMIT: usize = 24;

/// All down-sets of a finite poset with the lifted multiplication
/// `D ⊙ E = ↓{d ⊙ e}`, as bitmasks.
#[derive(Debug, Clone)]
pub struct DownSetAlgebra<'a> {
    raw: &'a RawQuantale,
    sets: Vec<u32>,
}

impl<'a> DownSetAlgebra<'a> {
    pub fn new(raw: &'a RawQuantale) -> Result<Self, ReflectError> {
        let n = raw.len();
        if n > ELEMENT_LIMIT {
            return Err(ReflectError::TooLarge(format!("{n} elements")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| (0..n).filter(|&y| raw.leq(y, x)).count());
        let below: Vec<u32> = (0..n)
            .map(|x| (0..n).filter(|&y| y != x && raw.leq(y, x)).fold(0, |m, y| m | 1 << y))
            .collect();
        let mut sets = Vec::new();
        fn go(order: &[usize], below: &[u32], k: usize, cur: u32, out: &mut Vec<u32>) {
            if k == order.len() {
                out.push(cur);
                return;
            }
            let x = order[k];
            go(order, below, k + 1, cur, out);
            if cur & below[x] == below[x] {
                go(order, below, k + 1, cur | 1 << x, out);
            }
        }
        go(&order, &below, 0, 0, &mut sets);
        sets.sort_unstable();
        Ok(DownSetAlgebra { raw, sets })
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn sets(&self) -> &[u32] {
        &self.sets
    }

    fn elements(mask: u32) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| mask >> i & 1 == 1)
    }

    pub fn down_closure(&self, seed: u32) -> u32 {
        let n = self.raw.len();
        (0..n)
            .filter(|&y| Self::elements(seed).any(|x| self.raw.leq(y, x)))
            .fold(0, |m, y| m | 1 << y)
    }

    pub fn product(&self, d: u32, e: u32) -> u32 {
        let mut seed = 0;
        for x in Self::elements(d) {
            for y in Self::elements(e) {
                seed |= 1 << self.raw.mul(x, y);
            }
        }
        self.down_closure(seed)
    }

    pub fn sup(&self, d: u32) -> usize {
        let items: Vec<usize> = Self::elements(d).collect();
        self.raw.sup(&items).expect("completeness was checked")
    }

    /// `↓{maximal elements}`.
    pub fn describe(&self, d: u32) -> String {
        let items: Vec<usize> = Self::elements(d).collect();
        let maximal: Vec<&str> = items
            .iter()
            .filter(|&&x| !items.iter().any(|&y| y != x && self.raw.leq(x, y)))
            .map(|&x| self.raw.elements()[x].as_str())
            .collect();
        match maximal.as_slice() {
            [] => "∅".to_string(),
            [one] => format!("↓{one}"),
            many => format!("↓{{{}}}", many.join(",")),
        }
    }
}

/// A pair of down-sets on which suprema and products disagree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoposCertificate {
    pub left: String,
    pub right: String,
    pub sup_of_product: String,
    pub product_of_sups: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoposReport {
    pub quantale: String,
    pub down_sets: usize,
    pub pairs_checked: usize,
    pub holds: bool,
    pub witness: Option<LoposCertificate>,
    /// Whether the exhaustive law check accepts the same structure, unit
    /// law aside.
    pub validates: bool,
    pub agrees: bool,
}

/// Checks `sup(D ⊙ E) = sup D ⊙ sup E` for every pair of down-sets. The
/// smallest failing pair is reported.
pub fn lopos_check(raw: &RawQuantale) -> Result<LoposReport, ReflectError> {
    let n = raw.len();
    let label = |i: usize| raw.elements()[i].clone();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if raw.mul(raw.mul(a, b), c) != raw.mul(a, raw.mul(b, c)) {
                    return Err(ReflectError::MulNotAssociative {
                        a: label(a),
                        b: label(b),
                        c: label(c),
                    });
                }
            }
        }
    }
    if raw.sup(&[]).is_none() {
        return Err(ReflectError::NotComplete("no least element".to_string()));
    }
    for a in 0..n {
        for b in 0..a {
            if raw.sup(&[a, b]).is_none() {
                return Err(ReflectError::NotComplete(format!(
                    "{} and {} have no join",
                    label(a),
                    label(b)
                )));
            }
        }
    }
    let alg = DownSetAlgebra::new(raw)?;
    let sups: Vec<usize> = alg.sets().iter().map(|&d| alg.sup(d)).collect();
    let mut failures = Vec::new();
    for (i, &d) in alg.sets().iter().enumerate() {
        for (j, &e) in alg.sets().iter().enumerate() {
            let lhs = alg.sup(alg.product(d, e));
            let rhs = raw.mul(sups[i], sups[j]);
            if lhs != rhs {
                failures.push(((d.count_ones() + e.count_ones()), d, e, lhs, rhs));
            }
        }
    }
    failures.sort();
    let witness = failures.first().map(|&(_, d, e, lhs, rhs)| LoposCertificate {
        left: alg.describe(d),
        right: alg.describe(e),
        sup_of_product: label(lhs),
        product_of_sups: label(rhs),
    });
    let holds = witness.is_none();
    // a declared unit is extra structure the criterion says nothing about
    let validates = match raw.validate() {
        Ok(_) => true,
        Err(report) => report.violations.iter().all(|v| v.kind() == "unit_law_fails"),
    };
    Ok(LoposReport {
        quantale: raw.name().to_string(),
        down_sets: alg.len(),
        pairs_checked: alg.len() * alg.len(),
        holds,
        witness,
        validates,
        agrees: holds == validates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantale::{build_standard, StandardQuantale};

    /// The five-element lattice with three incomparable atoms, multiplied by meet.
    fn diamond() -> RawQuantale {
        let elements = ["0", "a", "b", "c", "1"].map(String::from).to_vec();
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)];
        let meet = |x: usize, y: usize| match (x, y) {
            (x, y) if x == y => x,
            (4, y) => y,
            (x, 4) => x,
            _ => 0,
        };
        let mul = (0..25).map(|k| meet(k / 5, k % 5)).collect();
        RawQuantale::from_parts("diamond".into(), elements, &pairs, mul, Some(4))
    }

    #[test]
    fn bundled_quantales_pass() {
        for name in StandardQuantale::ALL {
            for param in [2, 3] {
                let q = build_standard(name, param).unwrap();
                let r = lopos_check(&q.to_raw()).unwrap();
                assert!(r.holds && r.agrees, "{r:?}");
            }
        }
    }

    #[test]
    fn diamond_with_meet_fails_on_a_and_bc() {
        let r = lopos_check(&diamond()).unwrap();
        assert!(!r.holds);
        assert!(r.agrees);
        let w = r.witness.unwrap();
        assert_eq!((w.left.as_str(), w.right.as_str()), ("↓a", "↓{b,c}"));
        assert_eq!((w.sup_of_product.as_str(), w.product_of_sups.as_str()), ("0", "a"));
        assert_eq!(r.down_sets, 10);
    }

    #[test]
    fn non_associative_is_refused() {
        let mut raw = build_standard(StandardQuantale::ChainLocale, 3).unwrap().to_raw();
        raw.set_mul(0, 2, 2);
        assert!(matches!(lopos_check(&raw), Err(ReflectError::MulNotAssociative { .. })));
    }

    #[test]
    fn unit_law_is_outside_the_criterion() {
        let mut raw = build_standard(StandardQuantale::ChainLocale, 5).unwrap().to_raw();
        raw.set_mul(4, 3, 4);
        assert!(raw.validate().is_err());
        let r = lopos_check(&raw).unwrap();
        assert!(r.holds && r.validates && r.agrees);
    }

    #[test]
    fn incomplete_is_refused() {
        let elements = ["a", "b"].map(String::from).to_vec();
        let raw = RawQuantale::from_parts("antichain".into(), elements, &[], vec![0, 0, 0, 1], None);
        assert!(matches!(lopos_check(&raw), Err(ReflectError::NotComplete(_))));
    }
}
