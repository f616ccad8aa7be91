//! Pseudo-pullbacks: the equalizer of `f∘π1` and `g∘π2` over `A ⊗ B`. In a
//! quantale they reduce to the product, among finite sets to the pullback.

use std::sync::Arc;

use lopos::finset::{FinMap, FinSetObj};
use lopos::moncat::{pseudo_pullback, FinSetCat, MonoidalCategory, ThinCat, ThinMor};
use lopos::quantale::{build_standard, StandardQuantale};

fn main() {
    let q = Arc::new(build_standard(StandardQuantale::LukasiewiczChain, 3).unwrap());
    let site = ThinCat::new(q.clone()).unwrap();
    let (h, one) = (q.index_of("h").unwrap(), q.top());
    let leg = ThinMor::new(h, one);
    let pp = pseudo_pullback(&site, &leg, &leg).unwrap();
    println!("pseudo-pullback of h → 1 with itself: {}", q.label(pp.apex));
    println!("the ordinary pullback would be h ∧ h = {}", q.label(q.meet(h, h)));

    let sets = FinSetCat::new(3);
    let a = FinSetObj::new(["a0", "a1", "a2"]).unwrap();
    let b = FinSetObj::new(["b0", "b1"]).unwrap();
    let c = FinSetObj::new(["even", "odd"]).unwrap();
    let f = FinMap::new(a, c.clone(), [("a0", "even"), ("a1", "odd"), ("a2", "even")]).unwrap();
    let g = FinMap::new(b, c, [("b0", "even"), ("b1", "odd")]).unwrap();
    let pp = pseudo_pullback(&sets, &f, &g).unwrap();
    println!(
        "\nfinite sets: {} with {} elements",
        sets.describe(&pp.apex),
        pp.apex.len()
    );
    for k in 0..pp.apex.len() {
        println!(
            "  {} ↦ ({}, {})",
            pp.apex.label(k),
            pp.p1.apply_label(pp.apex.label(k)).unwrap(),
            pp.p2.apply_label(pp.apex.label(k)).unwrap()
        );
    }
}
