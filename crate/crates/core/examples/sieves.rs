//! Sieves of covers and their canonical morphisms into representables. On a
//! locale the canonical morphism is always mono; on the Łukasiewicz chain
//! the cover {h, h} of h is not.

use std::sync::Arc;

use lopos::coverage::canonical_quantale_coverage;
use lopos::moncat::ThinCat;
use lopos::presheaf::{is_mono, sieve_of};
use lopos::quantale::{build_standard, StandardQuantale};

fn report(name: StandardQuantale, n: usize) {
    let site = Arc::new(ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap());
    let cov = canonical_quantale_coverage(site.clone()).unwrap();
    let mut monos = 0;
    let mut first_non_mono = None;
    for cover in cov.all_families() {
        let s = sieve_of(&site, cover).unwrap();
        if is_mono(&s.canonical) {
            monos += 1;
        } else if first_non_mono.is_none() {
            first_non_mono = Some((cov.describe_family(cover), s.presheaf.to_string()));
        }
    }
    println!(
        "{}: {monos} of {} sieves mono",
        site.quantale().name(),
        cov.family_count()
    );
    if let Some((cover, sieve)) = first_non_mono {
        println!("  first non-mono sieve, of {cover}:\n{sieve}");
    }
}

fn main() {
    report(StandardQuantale::PowersetLocale, 2);
    report(StandardQuantale::ChainLocale, 3);
    report(StandardQuantale::LukasiewiczChain, 3);
}
