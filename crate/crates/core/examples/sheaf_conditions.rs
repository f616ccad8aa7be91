//! The two forms of the sheaf condition side by side on a handful of
//! presheaves over the three-element Łukasiewicz chain.

use std::sync::Arc;

use lopos::coverage::canonical_quantale_coverage;
use lopos::finset::FinSetObj;
use lopos::moncat::ThinCat;
use lopos::presheaf::Presheaf;
use lopos::quantale::{build_standard, StandardQuantale};
use lopos::sheaf::{check_sheaf_equalizer, check_sheaf_orthogonal, shift_presheaf};

fn main() {
    let q = Arc::new(build_standard(StandardQuantale::LukasiewiczChain, 3).unwrap());
    let site = Arc::new(ThinCat::new(q.clone()).unwrap());
    let cov = canonical_quantale_coverage(site.clone()).unwrap();
    let h = q.index_of("h").unwrap();

    let doubled = {
        let at = vec![FinSetObj::range(1), FinSetObj::range(2), FinSetObj::range(2)];
        Presheaf::from_fn(site.clone(), at, |v, u, x| if v == u { x } else { 0 }).unwrap()
    };
    let candidates = [
        ("terminal", Presheaf::terminal(site.clone())),
        ("y(h)", Presheaf::yoneda(site.clone(), h)),
        ("empty", Presheaf::empty(site.clone())),
        (
            "constant {a,b}",
            Presheaf::constant_set(site.clone(), FinSetObj::new(["a", "b"]).unwrap()),
        ),
        ("doubled", doubled),
    ];
    for (name, f) in &candidates {
        let eq = check_sheaf_equalizer(f, &cov).unwrap();
        let or = check_sheaf_orthogonal(f, &cov).unwrap();
        println!(
            "{name:<16} equalizer: {:<15} orthogonal: {}",
            eq.verdict.as_str(),
            or.verdict.as_str()
        );
        if let Some(w) = eq.witnesses.first() {
            println!("{:<16} e.g. {:?} on {}: {:?}", "", w.kind, w.cover, w.sections);
        }
    }

    let y1 = Presheaf::yoneda(site.clone(), q.top());
    let shifted = shift_presheaf(&y1, h).unwrap();
    println!("\ny(1) shifted by h:\n{shifted}");
    println!(
        "still a sheaf: {}",
        check_sheaf_equalizer(&shifted, &cov).unwrap().is_sheaf()
    );
}
