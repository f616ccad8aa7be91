//! Sheafify by forcing, certify the result against every small sheaf, and
//! compare with the plus construction on a locale.

use std::sync::Arc;

use lopos::coverage::canonical_quantale_coverage;
use lopos::finset::FinSetObj;
use lopos::moncat::ThinCat;
use lopos::presheaf::{isomorphic, Presheaf};
use lopos::quantale::{build_standard, StandardQuantale};
use lopos::reflect::{certify_reflection, non_lex_witness, preserves_terminal, sheaf_battery, sheafify};
use lopos::sheaf::plus_construction;

fn main() {
    for (name, n) in [
        (StandardQuantale::LukasiewiczChain, 3),
        (StandardQuantale::PowersetLocale, 2),
    ] {
        let site = Arc::new(ThinCat::new(Arc::new(build_standard(name, n).unwrap())).unwrap());
        let cov = canonical_quantale_coverage(site.clone()).unwrap();
        let p = Presheaf::constant_set(site.clone(), FinSetObj::new(["a", "b"]).unwrap());
        let r = sheafify(&p, &cov, 16).unwrap();
        println!(
            "{}: constant {{a,b}} sheafifies in {} rounds",
            site.quantale().name(),
            r.iterations
        );
        println!("{}", r.sheaf);

        let battery = sheaf_battery(&cov, 2).unwrap();
        let cert = certify_reflection(&r, &battery, &cov).unwrap();
        println!("certified: {} ({})", cert.passed, cert.note);
        println!("terminal preserved: {}", preserves_terminal(&cov).unwrap());

        if site.quantale().classify().locale {
            let (once, _) = plus_construction(&p, &cov).unwrap();
            let (twice, _) = plus_construction(&once, &cov).unwrap();
            println!(
                "agrees with the plus construction twice: {}",
                isomorphic(&twice, &r.sheaf)
            );
        } else if let Some(w) = non_lex_witness(&cov, 2, 16).unwrap() {
            println!(
                "an equalizer is not preserved: sheafified equalizer has {} elements, equalizer of the sheafified pair {}",
                w.sheafified_equalizer, w.equalizer_of_sheafified
            );
        }
        println!();
    }
}
