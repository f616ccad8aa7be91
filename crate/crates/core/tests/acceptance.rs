mod common;

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{load_all, load_site, oracle_is_quantale, LOCALIC};
use lopos::coverage::{
    canonical_quantale_coverage, check_prelopology, check_pretopology, single_deletions, CoverFamily,
};
use lopos::moncat::{verify_appendix_suite, Defect, FinSetCat, ThinCat, ThinMor};
use lopos::presheaf::{is_mono, isomorphic, sieve_of, sieve_of_literal, Presheaf};
use lopos::quantale::{build_standard, Quantale, RawQuantale, StandardQuantale};
use lopos::reflect::{
    certify_reflection, lopos_check, preserves_terminal, sheaf_battery, sheafify, star, subsheaf_lattice,
};
use lopos::sheaf::{check_sheaf_equalizer, check_sheaf_orthogonal, plus_construction, shift_presheaf};

type Outcome = Result<String, String>;

fn criterion(n: u32, title: &str, budget: Duration, body: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let result = result.and_then(|detail| {
        if elapsed <= budget {
            Ok(detail)
        } else {
            Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
        }
    });
    match &result {
        Ok(detail) => println!("criterion {n:>2} PASS  {title} ({elapsed:.2?}): {detail}"),
        Err(why) => println!("criterion {n:>2} FAIL  {title} ({elapsed:.2?}): {why}"),
    }
    result.is_ok()
}

fn ensure(cond: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why())
    }
}

fn standard(name: StandardQuantale, n: usize) -> Quantale {
    build_standard(name, n).unwrap()
}

fn thin(q: Quantale) -> Arc<ThinCat> {
    Arc::new(ThinCat::new(Arc::new(q)).unwrap())
}

fn bundled() -> Vec<Quantale> {
    let mut out = vec![standard(StandardQuantale::PowersetLocale, 2)];
    out.extend((1..=5).map(|n| standard(StandardQuantale::ChainLocale, n)));
    out.push(standard(StandardQuantale::LukasiewiczChain, 3));
    out.push(standard(StandardQuantale::TruncatedNat, 3));
    out.push(standard(StandardQuantale::IdealsZmod, 4));
    out.push(standard(StandardQuantale::IdealsZmod, 12));
    out
}

fn c01_quantale_laws() -> bool {
    criterion(1, "quantale law suite and mutations", Duration::from_secs(1), || {
        let mut caught = 0;
        let mut benign = 0;
        for q in bundled() {
            let raw = q.to_raw();
            ensure(raw.validate().is_ok() && oracle_is_quantale(&raw), || {
                format!("{} rejected", q.name())
            })?;
            let n = q.len();
            for a in 0..n {
                for b in 0..n {
                    for c in (0..n).filter(|&c| c != q.mul(a, b)) {
                        let mut m = raw.clone();
                        m.set_mul(a, b, c);
                        let valid = oracle_is_quantale(&m);
                        ensure(m.validate().is_ok() == valid, || {
                            format!("{}: setting {a}⊙{b}={c} misjudged", q.name())
                        })?;
                        if valid {
                            benign += 1;
                        } else {
                            caught += 1;
                        }
                    }
                }
            }
        }
        ensure(caught >= 10, || format!("only {caught} breaking mutations"))?;
        Ok(format!(
            "{} quantales valid, {caught} breaking mutations caught, {benign} lawful mutants accepted",
            bundled().len()
        ))
    })
}

fn c02_bridge_on_locales() -> bool {
    criterion(
        2,
        "pretopology and prelopology agree on locales",
        Duration::from_secs(5),
        || {
            let mut variants = 0;
            let mut both_ways = BTreeSet::new();
            let locales = [
                standard(StandardQuantale::PowersetLocale, 2),
                standard(StandardQuantale::ChainLocale, 2),
                standard(StandardQuantale::ChainLocale, 3),
                standard(StandardQuantale::ChainLocale, 4),
            ];
            for q in locales {
                let canonical = canonical_quantale_coverage(thin(q)).unwrap();
                let mut all = vec![canonical.clone()];
                all.extend(single_deletions(&canonical));
                for cov in all {
                    let pre = check_pretopology(&cov).map_err(|e| e.to_string())?.passed;
                    let lop = check_prelopology(&cov).map_err(|e| e.to_string())?.passed;
                    ensure(pre == lop, || {
                        format!("{}: pretopology {pre}, prelopology {lop}", cov.name())
                    })?;
                    both_ways.insert(pre);
                    variants += 1;
                }
            }
            ensure(variants >= 20, || format!("only {variants} variants"))?;
            ensure(both_ways.len() == 2, || "no variant exercised both outcomes".into())?;
            Ok(format!(
                "{variants} coverage variants, passing and failing cases both present"
            ))
        },
    )
}

fn c03_sheaf_definitions_agree() -> bool {
    criterion(
        3,
        "equalizer and orthogonal sheaf conditions agree",
        Duration::from_secs(30),
        || {
            let mut pairs = 0;
            let mut seen = BTreeSet::new();
            for s in load_all() {
                ensure(s.presheaves.len() >= 6 && s.coverages.len() >= 2, || {
                    format!("{} corpus too small", s.name)
                })?;
                for (cn, cov) in &s.coverages {
                    for (pn, f) in &s.presheaves {
                        let eq = check_sheaf_equalizer(f, cov).map_err(|e| e.to_string())?.verdict;
                        let or = check_sheaf_orthogonal(f, cov).map_err(|e| e.to_string())?.verdict;
                        ensure(eq == or, || {
                            format!("{}/{cn}/{pn}: {} vs {}", s.name, eq.as_str(), or.as_str())
                        })?;
                        seen.insert(eq.as_str());
                        pairs += 1;
                    }
                }
            }
            ensure(seen.len() == 3, || format!("verdicts seen: {seen:?}"))?;
            Ok(format!("{pairs} (presheaf, coverage) pairs, verdicts {seen:?}"))
        },
    )
}

fn c04_shift_preserves_sheaves() -> bool {
    criterion(4, "shifting a sheaf gives a sheaf", Duration::from_secs(10), || {
        let mut shifts = 0;
        for s in load_all() {
            for (cn, cov) in &s.coverages {
                if !check_prelopology(cov).map_err(|e| e.to_string())?.passed {
                    continue;
                }
                for (pn, f) in &s.presheaves {
                    if !check_sheaf_equalizer(f, cov).unwrap().is_sheaf() {
                        continue;
                    }
                    for u in 0..f.len() {
                        let g = shift_presheaf(f, u).map_err(|e| e.to_string())?;
                        ensure(check_sheaf_equalizer(&g, cov).unwrap().is_sheaf(), || {
                            format!("{}/{cn}/{pn} shifted by {}", s.name, f.quantale().label(u))
                        })?;
                        shifts += 1;
                    }
                }
            }
        }
        ensure(shifts > 0, || "no shifts checked".into())?;
        Ok(format!("{shifts} shifted sheaves checked"))
    })
}

fn c05_sheafification_sound() -> bool {
    criterion(5, "sheafification soundness", Duration::from_secs(60), || {
        let mut done = 0;
        let mut plus_checked = 0;
        for s in load_all() {
            let cov = s.coverage("canonical");
            let battery = sheaf_battery(cov, 2).map_err(|e| e.to_string())?;
            let locale = s.site().quantale().classify().locale;
            for (pn, p) in &s.presheaves {
                let tag = || format!("{}/{pn}", s.name);
                let r = sheafify(p, cov, 16).map_err(|e| e.to_string())?;
                ensure(r.converged, || format!("{} did not converge", tag()))?;
                let eq = check_sheaf_equalizer(&r.sheaf, cov).unwrap().is_sheaf();
                let or = check_sheaf_orthogonal(&r.sheaf, cov).unwrap().is_sheaf();
                ensure(eq && or, || format!("{}: output fails a sheaf check", tag()))?;
                let cert = certify_reflection(&r, &battery, cov).map_err(|e| e.to_string())?;
                ensure(cert.passed, || format!("{}: certification failed", tag()))?;
                if locale {
                    let (once, _) = plus_construction(p, cov).map_err(|e| e.to_string())?;
                    let (twice, _) = plus_construction(&once, cov).map_err(|e| e.to_string())?;
                    ensure(isomorphic(&twice, &r.sheaf), || {
                        format!("{}: differs from plus twice", tag())
                    })?;
                    plus_checked += 1;
                }
                done += 1;
            }
        }
        Ok(format!(
            "{done} presheaves sheafified and certified, {plus_checked} matched the plus construction"
        ))
    })
}

fn c06_terminal_preserved() -> bool {
    criterion(
        6,
        "sheafification preserves the terminal object",
        Duration::from_secs(5),
        || {
            let mut flavors = BTreeSet::new();
            for s in load_all() {
                let flavor = if s.loaded.factors.is_some() {
                    "product"
                } else if s.site().quantale().classify().locale {
                    "localic"
                } else {
                    "quantalic"
                };
                let cov = s.coverage("canonical");
                ensure(preserves_terminal(cov).map_err(|e| e.to_string())?, || {
                    format!("{} moves 1", s.name)
                })?;
                let t = Presheaf::terminal(Arc::clone(s.site()));
                let r = sheafify(&t, cov, 16).map_err(|e| e.to_string())?;
                ensure(isomorphic(&r.sheaf, &t), || format!("{}: a(1) is not 1", s.name))?;
                flavors.insert(flavor);
            }
            ensure(flavors.len() == 3, || format!("flavors covered: {flavors:?}"))?;
            Ok(format!("all corpus sites, flavors {flavors:?}"))
        },
    )
}

fn c07_subterminals() -> bool {
    criterion(
        7,
        "Sub(1) is the quantale and * is its product",
        Duration::from_secs(60),
        || {
            let mut summary = Vec::new();
            for name in ["powerset2", "chain3", "luk3", "tnat3"] {
                let s = load_site(name);
                let q = s.site().quantale().clone();
                let cov = s.coverage("canonical");
                let one = Arc::new(Presheaf::terminal(Arc::clone(s.site())));
                let lat = subsheaf_lattice(&one, cov).map_err(|e| e.to_string())?;
                let to_q: Vec<usize> = lat
                    .members()
                    .iter()
                    .map(|m| q.join_all((0..q.len()).filter(|&u| !m[u].is_empty())))
                    .collect();
                let image: BTreeSet<usize> = to_q.iter().copied().collect();
                ensure(lat.len() == q.len() && image.len() == q.len(), || {
                    format!("{name}: {} subterminals", lat.len())
                })?;
                let locale = q.classify().locale;
                for i in 0..lat.len() {
                    for j in 0..lat.len() {
                        ensure(lat.leq(i, j) == q.leq(to_q[i], to_q[j]), || {
                            format!("{name}: order differs at {i},{j}")
                        })?;
                        let st = star(&one, lat.member(i), lat.member(j), cov, 16).map_err(|e| e.to_string())?;
                        let k = lat
                            .index_of(&st)
                            .ok_or_else(|| format!("{name}: star left the lattice"))?;
                        let want = if locale {
                            q.meet(to_q[i], to_q[j])
                        } else {
                            q.mul(to_q[i], to_q[j])
                        };
                        ensure(to_q[k] == want, || {
                            format!(
                                "{name}: {} * {} gave {}",
                                q.label(to_q[i]),
                                q.label(to_q[j]),
                                q.label(to_q[k])
                            )
                        })?;
                    }
                }
                summary.push(format!("{name} ({})", lat.len()));
            }
            Ok(summary.join(", "))
        },
    )
}

fn c08_sieves() -> bool {
    criterion(
        8,
        "non-mono sieve on the Łukasiewicz chain",
        Duration::from_secs(1),
        || {
            let luk = load_site("luk3");
            let q = luk.site().quantale();
            let h = q.index_of("h").unwrap();
            let cover = CoverFamily::new(h, vec![ThinMor::new(h, h), ThinMor::new(h, h)]);
            ensure(luk.coverage("canonical").covers(&cover), || {
                "{h,h} is not a cover of h".into()
            })?;
            let s = sieve_of(luk.site(), &cover).map_err(|e| e.to_string())?;
            let literal = sieve_of_literal(luk.site(), &cover).map_err(|e| e.to_string())?;
            ensure(isomorphic(&s.presheaf, &literal), || {
                "sieve differs from the literal coequalizer".into()
            })?;
            // the canonical map lands in y(h), a subterminal, so mono means at most one element everywhere
            let oracle_mono = (0..q.len()).all(|w| s.presheaf.at(w).len() <= 1);
            ensure(!oracle_mono && !is_mono(&s.canonical), || "{h,h} sieve is mono".into())?;
            let mut localic = 0;
            for name in LOCALIC {
                let site = load_site(name);
                for (cn, cov) in &site.coverages {
                    for fam in cov.all_families() {
                        let s = sieve_of(site.site(), fam).map_err(|e| e.to_string())?;
                        ensure(is_mono(&s.canonical), || {
                            format!("{name}/{cn}: {} not mono", cov.describe_family(fam))
                        })?;
                        localic += 1;
                    }
                }
            }
            Ok(format!(
                "S(h) has {} elements; {localic} localic sieves all mono",
                s.presheaf.at(h).len()
            ))
        },
    )
}

fn c09_appendix() -> bool {
    criterion(
        9,
        "coherence suite and injected breakage",
        Duration::from_secs(120),
        || {
            let report = verify_appendix_suite(&FinSetCat::new(3));
            ensure(report.passed(), || format!("finite sets fail {:?}", report.failed()))?;
            let instances: usize = report.checks.iter().map(|c| c.checked).sum();
            for q in bundled() {
                let name = q.name().to_string();
                ensure(verify_appendix_suite(thin(q).as_ref()).passed(), || {
                    format!("{name} fails")
                })?;
            }
            for d in Defect::ALL {
                let broken = verify_appendix_suite(&FinSetCat::with_defect(3, d));
                ensure(!broken.passed(), || format!("{} went unnoticed", d.as_str()))?;
            }
            Ok(format!(
                "{} diagrams over {instances} instances, {} thin sites, {} defects detected",
                report.checks.len(),
                bundled().len(),
                Defect::ALL.len()
            ))
        },
    )
}

fn diamond() -> RawQuantale {
    let elements = ["0", "a", "b", "c", "1"].map(String::from).to_vec();
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)];
    let meet = |x: usize, y: usize| match (x, y) {
        _ if x == y => x,
        (4, y) => y,
        (x, 4) => x,
        _ => 0,
    };
    RawQuantale::from_parts(
        "diamond".into(),
        elements,
        &pairs,
        (0..25).map(|k| meet(k / 5, k % 5)).collect(),
        Some(4),
    )
}

fn c10_lopos_criterion() -> bool {
    criterion(
        10,
        "down-set criterion agrees with the law check",
        Duration::from_secs(5),
        || {
            for q in bundled() {
                let r = lopos_check(&q.to_raw()).map_err(|e| e.to_string())?;
                ensure(r.holds && r.agrees, || format!("{}: {r:?}", q.name()))?;
            }
            let raw = diamond();
            ensure(!oracle_is_quantale(&raw), || {
                "the diamond should not be a quantale".into()
            })?;
            let r = lopos_check(&raw).map_err(|e| e.to_string())?;
            let w = r.witness.clone().ok_or("no witness for the diamond")?;
            ensure(!r.holds && r.agrees, || format!("{r:?}"))?;
            ensure(w.left == "↓a" && w.right == "↓{b,c}", || format!("{w:?}"))?;
            ensure(w.sup_of_product == "0" && w.product_of_sups == "a", || format!("{w:?}"))?;
            Ok(format!(
                "{} bundled agree; diamond fails at {} ⊙ {}",
                bundled().len(),
                w.left,
                w.right
            ))
        },
    )
}

fn main() {
    let criteria: [fn() -> bool; 10] = [
        c01_quantale_laws,
        c02_bridge_on_locales,
        c03_sheaf_definitions_agree,
        c04_shift_preserves_sheaves,
        c05_sheafification_sound,
        c06_terminal_preserved,
        c07_subterminals,
        c08_sieves,
        c09_appendix,
        c10_lopos_criterion,
    ];
    let failed = criteria.iter().filter(|c| !c()).count();
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
