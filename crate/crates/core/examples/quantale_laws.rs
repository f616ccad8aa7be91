//! Validate the bundled quantales, classify them, and watch a single
//! corrupted table entry get caught.

use lopos::quantale::{build_standard, StandardQuantale};

fn main() {
    for name in StandardQuantale::ALL {
        let param = match name {
            StandardQuantale::IdealsZmod => 12,
            _ => 3,
        };
        let q = build_standard(name, param).expect("bundled quantales validate");
        let flags = q.classify();
        println!(
            "{:<24} {} elements  commutative={} idempotent={} integral={} locale={}",
            q.name(),
            q.len(),
            flags.commutative,
            flags.idempotent,
            flags.integral,
            flags.locale
        );
    }

    let luk = build_standard(StandardQuantale::LukasiewiczChain, 3).unwrap();
    let h = luk.index_of("h").unwrap();
    println!("\nin {}: h ⊙ h = {}", luk.name(), luk.label(luk.mul(h, h)));

    let mut raw = luk.to_raw();
    raw.set_mul(h, h, h);
    println!("with h ⊙ h = h instead: valid = {}", raw.validate().is_ok());

    let mut raw = luk.to_raw();
    raw.set_mul(h, luk.top(), luk.bottom());
    match raw.validate() {
        Ok(_) => println!("mutant accepted"),
        Err(report) => println!("with h ⊙ 1 = 0 the laws break:\n{report}"),
    }
}
