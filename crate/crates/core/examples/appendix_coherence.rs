//! Exhaustive coherence diagrams on finite sets up to size 3 and on a
//! quantale, then the same suite against deliberately broken instances.

use std::sync::Arc;

use lopos::moncat::{verify_appendix_suite, Defect, FinSetCat, ThinCat};
use lopos::quantale::{build_standard, StandardQuantale};

fn main() {
    let report = verify_appendix_suite(&FinSetCat::new(3));
    for c in &report.checks {
        println!(
            "{:<28} {:>7} instances  {}",
            c.name,
            c.checked,
            if c.passed() { "ok" } else { "FAILED" }
        );
    }

    let luk = ThinCat::new(Arc::new(build_standard(StandardQuantale::LukasiewiczChain, 3).unwrap())).unwrap();
    println!(
        "\n{}: passed = {}",
        luk.quantale().name(),
        verify_appendix_suite(&luk).passed()
    );

    println!();
    for d in Defect::ALL {
        let broken = verify_appendix_suite(&FinSetCat::with_defect(2, d));
        println!("{:<22} caught by {:?}", d.as_str(), broken.failed());
    }
}
