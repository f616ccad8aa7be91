//! The down-set criterion: suprema must preserve the lifted product. The
//! diamond lattice with meet as multiplication fails it.

use lopos::quantale::{build_standard, RawQuantale, StandardQuantale};
use lopos::reflect::lopos_check;

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

fn main() {
    for name in StandardQuantale::ALL {
        let q = build_standard(name, 3).unwrap();
        let r = lopos_check(&q.to_raw()).unwrap();
        println!(
            "{:<24} holds={} agrees with the law check={}",
            r.quantale, r.holds, r.agrees
        );
    }
    let r = lopos_check(&diamond()).unwrap();
    let w = r.witness.expect("the diamond fails");
    println!(
        "\ndiamond with meet: sup({} ⊙ {}) = {} but the product of the sups is {}",
        w.left, w.right, w.sup_of_product, w.product_of_sups
    );
}
