//! Check coverages against the prelopology flavors and the classical
//! pretopology axioms, then break one and read off the failing axiom.

use std::sync::Arc;

use lopos::coverage::{
    canonical_quantale_coverage, check_prelopology, check_pretopology, check_strong_prelopology, product_coverage,
    single_deletions, Coverage,
};
use lopos::moncat::ThinCat;
use lopos::quantale::{build_standard, StandardQuantale};

fn site(name: StandardQuantale, n: usize) -> Arc<ThinCat> {
    Arc::new(ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap())
}

fn main() {
    let luk = canonical_quantale_coverage(site(StandardQuantale::LukasiewiczChain, 3)).unwrap();
    println!("{}", check_strong_prelopology(&luk).unwrap().summary());
    println!(
        "pretopology on a non-cartesian site: {}",
        check_pretopology(&luk).unwrap_err()
    );

    let locale = canonical_quantale_coverage(site(StandardQuantale::PowersetLocale, 2)).unwrap();
    println!("{}", check_pretopology(&locale).unwrap().summary());
    println!("{}", check_prelopology(&locale).unwrap().summary());

    println!("\nsingle deletions from {}:", luk.name());
    for mutant in single_deletions(&luk) {
        println!("  {}", check_prelopology(&mutant).unwrap().summary());
    }

    let chain = Coverage::trivial(site(StandardQuantale::ChainLocale, 2));
    let mixed = product_coverage(&chain, &luk).unwrap();
    println!("\n{}", check_prelopology(&mixed).unwrap().summary());
}
