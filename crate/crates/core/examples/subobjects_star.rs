//! The lattice of subsheaves of the terminal sheaf and the `*` table,
//! compared with the quantale it should reproduce.

use std::sync::Arc;

use lopos::coverage::canonical_quantale_coverage;
use lopos::moncat::ThinCat;
use lopos::presheaf::Presheaf;
use lopos::quantale::{build_standard, StandardQuantale};
use lopos::reflect::{star, subsheaf_lattice};

fn main() {
    for (name, n) in [
        (StandardQuantale::LukasiewiczChain, 3),
        (StandardQuantale::TruncatedNat, 3),
    ] {
        let q = Arc::new(build_standard(name, n).unwrap());
        let site = Arc::new(ThinCat::new(q.clone()).unwrap());
        let cov = canonical_quantale_coverage(site.clone()).unwrap();
        let one = Arc::new(Presheaf::terminal(site));
        let lat = subsheaf_lattice(&one, &cov).unwrap();
        // a subterminal is determined by the join of where it is inhabited
        let support: Vec<usize> = lat
            .members()
            .iter()
            .map(|m| q.join_all((0..q.len()).filter(|&u| !m[u].is_empty())))
            .collect();
        println!("{}: {} subterminals", q.name(), lat.len());
        for i in 0..lat.len() {
            let row: Vec<&str> = (0..lat.len())
                .map(|j| {
                    let s = star(&one, lat.member(i), lat.member(j), &cov, 16).unwrap();
                    q.label(support[lat.index_of(&s).unwrap()])
                })
                .collect();
            let expected: Vec<&str> = (0..lat.len()).map(|j| q.label(q.mul(support[i], support[j]))).collect();
            println!("  ↓{:<3} * -> {row:?}   ⊙ -> {expected:?}", q.label(support[i]));
        }
    }
}
