//! Exhaustive coherence checks over every object tuple of an instance.

use rayon::prelude::*;
use serde::Serialize;

use super::{compose_chain, projection1, projection2, MonCatError, MonoidalCategory};

const WITNESS_CAP: usize = 8;

/// Result of checking one diagram over all tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagramCheck {
    pub name: String,
    pub checked: usize,
    pub failures: usize,
    pub witnesses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

impl DiagramCheck {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AppendixReport {
    pub instance: String,
    pub size_bound: Option<usize>,
    pub checks: Vec<DiagramCheck>,
}

impl AppendixReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(DiagramCheck::passed)
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn check(&self, name: &str) -> Option<&DiagramCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Default)]
struct Tally {
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(witness());
        }
    }
}

fn run<T, F>(name: &str, tuples: &[T], body: F) -> DiagramCheck
where
    T: Sync,
    F: Fn(&T, &mut Tally) + Sync,
{
    let tallies: Vec<Tally> = tuples
        .par_iter()
        .map(|t| {
            let mut tally = Tally::default();
            body(t, &mut tally);
            tally
        })
        .collect();
    let mut out = DiagramCheck {
        name: name.to_string(),
        checked: 0,
        failures: 0,
        witnesses: Vec::new(),
        skipped: None,
    };
    for t in tallies {
        out.checked += t.checked;
        out.failures += t.failures.len();
        for w in t.failures {
            if out.witnesses.len() < WITNESS_CAP {
                out.witnesses.push(w);
            }
        }
    }
    out
}

fn skipped(name: &str, reason: &str) -> DiagramCheck {
    DiagramCheck {
        name: name.to_string(),
        checked: 0,
        failures: 0,
        witnesses: Vec::new(),
        skipped: Some(reason.to_string()),
    }
}

fn same<M: PartialEq>(lhs: Result<M, MonCatError>, rhs: Result<M, MonCatError>) -> bool {
    matches!((lhs, rhs), (Ok(l), Ok(r)) if l == r)
}

fn tuples<T: Clone>(objs: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                objs.iter().map(move |o| {
                    let mut t = t.clone();
                    t.push(o.clone());
                    t
                })
            })
            .collect();
    }
    out
}

/// Checks category laws, monoidal coherence, the projection lemmas and, when a
/// braiding is present, the braided lemmas and the equalizing composite.
pub fn verify_appendix_suite<C: MonoidalCategory>(c: &C) -> AppendixReport {
    let objs = c.objects();
    let one = c.unit();
    let t2 = tuples(&objs, 2);
    let t3 = tuples(&objs, 3);
    let t4 = tuples(&objs, 4);
    let d = |xs: &[&C::Obj]| xs.iter().map(|x| c.describe(x)).collect::<Vec<_>>().join(", ");
    let p1 = |x: &C::Obj, y: &C::Obj| projection1(c, x, y);
    let p2 = |x: &C::Obj, y: &C::Obj| projection2(c, x, y);
    let ten = |x: &C::Obj, y: &C::Obj| c.tensor(x, y);
    let tm = |f: &C::Mor, g: &C::Mor| c.tensor_mor(f, g);
    let id = |x: &C::Obj| c.id(x);

    let mut checks = Vec::new();

    checks.push(run("category_identity", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        for f in c.hom(a, b) {
            let ok = same(c.compose(&id(b), &f), Ok(f.clone())) && same(c.compose(&f, &id(a)), Ok(f.clone()));
            tally.record(ok, || format!("{} with {f:?}", d(&[a, b])));
        }
    }));

    checks.push(run("category_associativity", &t4, |t, tally| {
        let (a, b, x, y) = (&t[0], &t[1], &t[2], &t[3]);
        let (fs, gs, hs) = (c.hom(a, b), c.hom(b, x), c.hom(x, y));
        for f in &fs {
            for g in &gs {
                let gf = c.compose(g, f);
                for h in &hs {
                    let lhs = gf.clone().and_then(|gf| c.compose(h, &gf));
                    let rhs = c.compose(h, g).and_then(|hg| c.compose(&hg, f));
                    tally.record(same(lhs, rhs), || {
                        format!("{} with {f:?}, {g:?}, {h:?}", d(&[a, b, x, y]))
                    });
                }
            }
        }
    }));

    checks.push(run("tensor_identity", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        tally.record(tm(&id(a), &id(b)) == id(&ten(a, b)), || d(&[a, b]));
    }));

    checks.push(run("unit_is_terminal", &objs, |x, tally| {
        let homs = c.hom(x, &one);
        let ok = homs.len() == 1 && c.terminal(x).as_ref() == homs.first();
        tally.record(ok, || {
            format!("{} has {} arrows to the unit", c.describe(x), homs.len())
        });
    }));

    checks.push(run("pentagon", &t4, |t, tally| {
        let (a, b, x, y) = (&t[0], &t[1], &t[2], &t[3]);
        let lhs = compose_chain(c, &[&c.associator(a, b, &ten(x, y)), &c.associator(&ten(a, b), x, y)]);
        let rhs = compose_chain(
            c,
            &[
                &tm(&id(a), &c.associator(b, x, y)),
                &c.associator(a, &ten(b, x), y),
                &tm(&c.associator(a, b, x), &id(y)),
            ],
        );
        tally.record(same(lhs, rhs), || d(&[a, b, x, y]));
    }));

    checks.push(run("triangle", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        let lhs = c.compose(&tm(&id(a), &c.left_unitor(b)), &c.associator(a, &one, b));
        let rhs = Ok(tm(&c.right_unitor(a), &id(b)));
        tally.record(same(lhs, rhs), || d(&[a, b]));
    }));

    checks.push(run("left_unitor_associator", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        let lhs = c.compose(&c.left_unitor(&ten(a, b)), &c.associator(&one, a, b));
        tally.record(same(lhs, Ok(tm(&c.left_unitor(a), &id(b)))), || d(&[a, b]));
    }));

    checks.push(run("right_unitor_associator", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        let lhs = c.compose(&tm(&id(a), &c.right_unitor(b)), &c.associator(a, b, &one));
        tally.record(same(lhs, Ok(c.right_unitor(&ten(a, b)))), || d(&[a, b]));
    }));

    checks.push(run("associator_naturality", &t4, |t, tally| {
        let (a, a2, b, x) = (&t[0], &t[1], &t[2], &t[3]);
        for f in c.hom(a, a2) {
            let (ib, ix) = (id(b), id(x));
            // f in each of the three slots.
            let slots = [
                ((a, b, x), (a2, b, x), (f.clone(), ib.clone(), ix.clone())),
                ((b, a, x), (b, a2, x), (ib.clone(), f.clone(), ix.clone())),
                ((b, x, a), (b, x, a2), (ib.clone(), ix.clone(), f.clone())),
            ];
            for ((p, q, r), (p2_, q2, r2), (u, v, w)) in slots {
                let lhs = c.compose(&c.associator(p2_, q2, r2), &tm(&tm(&u, &v), &w));
                let rhs = c.compose(&tm(&u, &tm(&v, &w)), &c.associator(p, q, r));
                tally.record(same(lhs, rhs), || format!("{} with {f:?}", d(&[a, a2, b, x])));
            }
        }
    }));

    checks.push(run("unitor_naturality", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        for f in c.hom(a, b) {
            let l = same(
                c.compose(&f, &c.left_unitor(a)),
                c.compose(&c.left_unitor(b), &tm(&id(&one), &f)),
            );
            let r = same(
                c.compose(&f, &c.right_unitor(a)),
                c.compose(&c.right_unitor(b), &tm(&f, &id(&one))),
            );
            tally.record(l && r, || format!("{} with {f:?}", d(&[a, b])));
        }
    }));

    checks.push(run("delete_first_factor", &t3, |t, tally| {
        let (x, a, b) = (&t[0], &t[1], &t[2]);
        let lhs = p2(x, &ten(a, b)).and_then(|p| c.compose(&p, &c.associator(x, a, b)));
        let rhs = p2(x, a).map(|p| tm(&p, &id(b)));
        tally.record(same(lhs, rhs), || d(&[x, a, b]));
    }));

    checks.push(run("delete_last_factor", &t3, |t, tally| {
        let (a, b, x) = (&t[0], &t[1], &t[2]);
        let lhs = p1(b, x).and_then(|p| c.compose(&tm(&id(a), &p), &c.associator(a, b, x)));
        let rhs = p1(&ten(a, b), x);
        tally.record(same(lhs, rhs), || d(&[a, b, x]));
    }));

    checks.push(run("delete_middle_factor", &t3, |t, tally| {
        let (a, x, b) = (&t[0], &t[1], &t[2]);
        let lhs = p2(x, b).and_then(|p| c.compose(&tm(&id(a), &p), &c.associator(a, x, b)));
        let rhs = p1(a, x).map(|p| tm(&p, &id(b)));
        tally.record(same(lhs, rhs), || d(&[a, x, b]));
    }));

    checks.push(run("factor_first_projection", &t3, |t, tally| {
        let (x, a, b) = (&t[0], &t[1], &t[2]);
        let (xa, xb) = (ten(x, a), ten(x, b));
        let lhs = p1(&xa, &xb);
        let rhs = (|| {
            compose_chain(
                c,
                &[
                    &tm(&id(x), &p1(a, b)?),
                    &c.associator(x, a, b),
                    &tm(&id(&xa), &p2(x, b)?),
                ],
            )
        })();
        tally.record(same(lhs, rhs), || d(&[x, a, b]));
    }));

    checks.push(run("factor_second_projection", &t3, |t, tally| {
        let (x, a, b) = (&t[0], &t[1], &t[2]);
        let (xa, xb) = (ten(x, a), ten(x, b));
        let lhs = p2(&xa, &xb);
        let rhs = (|| c.compose(&p2(a, &xb)?, &tm(&p2(x, a)?, &id(&xb))))();
        tally.record(same(lhs, rhs), || d(&[x, a, b]));
    }));

    let braided = objs.iter().all(|a| objs.iter().all(|b| c.braiding(a, b).is_some()));
    let braided_names = [
        "braiding_first_projection",
        "braiding_second_projection",
        "braiding_unitors",
        "symmetry",
        "hexagon",
        "braiding_naturality",
        "equalizing_composite",
    ];
    if !braided {
        for name in braided_names {
            checks.push(skipped(name, "instance has no braiding"));
        }
        return AppendixReport {
            instance: c.name(),
            size_bound: c.size_bound(),
            checks,
        };
    }
    let br = |x: &C::Obj, y: &C::Obj| c.braiding(x, y).ok_or_else(|| MonCatError::NoBraiding(c.name()));

    checks.push(run("braiding_first_projection", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        let lhs = (|| c.compose(&p2(b, a)?, &br(a, b)?))();
        tally.record(same(lhs, p1(a, b)), || d(&[a, b]));
    }));

    checks.push(run("braiding_second_projection", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        let lhs = (|| c.compose(&p1(b, a)?, &br(a, b)?))();
        tally.record(same(lhs, p2(a, b)), || d(&[a, b]));
    }));

    checks.push(run("braiding_unitors", &objs, |a, tally| {
        let l = (|| c.compose(&c.left_unitor(a), &br(a, &one)?))();
        let r = (|| c.compose(&c.right_unitor(a), &br(&one, a)?))();
        let ok = same(l, Ok(c.right_unitor(a))) && same(r, Ok(c.left_unitor(a)));
        tally.record(ok, || c.describe(a));
    }));

    checks.push(run("symmetry", &t2, |t, tally| {
        let (a, b) = (&t[0], &t[1]);
        let lhs = (|| c.compose(&br(b, a)?, &br(a, b)?))();
        tally.record(same(lhs, Ok(id(&ten(a, b)))), || d(&[a, b]));
    }));

    checks.push(run("hexagon", &t3, |t, tally| {
        let (a, b, x) = (&t[0], &t[1], &t[2]);
        let lhs = (|| {
            compose_chain(
                c,
                &[&c.associator(b, x, a), &br(a, &ten(b, x))?, &c.associator(a, b, x)],
            )
        })();
        let rhs = (|| {
            compose_chain(
                c,
                &[&tm(&id(b), &br(a, x)?), &c.associator(b, a, x), &tm(&br(a, b)?, &id(x))],
            )
        })();
        tally.record(same(lhs, rhs), || d(&[a, b, x]));
    }));

    checks.push(run("braiding_naturality", &t3, |t, tally| {
        let (a, a2, b) = (&t[0], &t[1], &t[2]);
        for f in c.hom(a, a2) {
            let lhs = (|| c.compose(&br(a2, b)?, &tm(&f, &id(b))))();
            let rhs = (|| c.compose(&tm(&id(b), &f), &br(a, b)?))();
            tally.record(same(lhs, rhs), || format!("{} with {f:?}", d(&[a, a2, b])));
        }
    }));

    checks.push(run("equalizing_composite", &t4, |t, tally| {
        let (x, a, b, z) = (&t[0], &t[1], &t[2], &t[3]);
        let (fs, gs) = (c.hom(a, z), c.hom(b, z));
        let ix = id(x);
        for f in &fs {
            for g in &gs {
                let ok = (|| -> Result<bool, MonCatError> {
                    let (xa, xb) = (ten(x, a), ten(x, b));
                    let phi = c.compose(&tm(&ix, f), &p1(&xa, &xb)?)?;
                    let psi = c.compose(&tm(&ix, g), &p2(&xa, &xb)?)?;
                    let (_, e) = c.equalizer(&phi, &psi)?;
                    let m = compose_chain(c, &[&c.associator(x, a, b), &tm(&id(&xa), &p2(x, b)?), &e])?;
                    let lhs = compose_chain(c, &[&tm(&ix, f), &tm(&ix, &p1(a, b)?), &m])?;
                    let rhs = compose_chain(c, &[&tm(&ix, g), &tm(&ix, &p2(a, b)?), &m])?;
                    Ok(lhs == rhs)
                })();
                tally.record(ok == Ok(true), || format!("{} with {f:?}, {g:?}", d(&[x, a, b, z])));
            }
        }
    }));

    AppendixReport {
        instance: c.name(),
        size_bound: c.size_bound(),
        checks,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::moncat::{Defect, FinSetCat, ProductCat, ThinCat};
    use crate::quantale::{build_standard, StandardQuantale};

    #[test]
    fn lawful_finset_passes_at_bound_two() {
        let report = verify_appendix_suite(&FinSetCat::new(2));
        assert!(report.passed(), "{:?}", report.failed());
        assert_eq!(report.size_bound, Some(2));
        assert!(report.checks.iter().all(|c| c.skipped.is_none()));
    }

    #[test]
    fn thin_instances_pass() {
        for (name, n) in [
            (StandardQuantale::LukasiewiczChain, 3),
            (StandardQuantale::TruncatedNat, 3),
            (StandardQuantale::PowersetLocale, 2),
        ] {
            let c = ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap();
            let report = verify_appendix_suite(&c);
            assert!(report.passed(), "{:?}", report.failed());
        }
    }

    #[test]
    fn product_instance_passes() {
        let luk = ThinCat::new(Arc::new(build_standard(StandardQuantale::LukasiewiczChain, 3).unwrap())).unwrap();
        let report = verify_appendix_suite(&ProductCat::new(FinSetCat::new(1), luk));
        assert!(report.passed(), "{:?}", report.failed());
    }

    #[test]
    fn swapped_braiding_breaks_projection_triangles() {
        let report = verify_appendix_suite(&FinSetCat::with_defect(2, Defect::SwappedBraiding));
        let check = report.check("braiding_first_projection").unwrap();
        assert!(!check.passed());
        assert!(!check.witnesses.is_empty());
    }

    #[test]
    fn every_defect_is_detected() {
        for defect in Defect::ALL {
            let report = verify_appendix_suite(&FinSetCat::with_defect(2, defect));
            assert!(!report.passed(), "{defect:?} slipped through");
        }
    }
}
