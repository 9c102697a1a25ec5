//! Hangs a 2 m cable between two pins and compares the settled sag with
//! the catenary.
//!
//! ```text
//! cargo run --release -p interact-core --example cable
//! ```

use interact_core::cable::{init_cable, static_solve, CableParams};
use interact_core::math::Vec3;

fn catenary_sag(span: f64, length: f64) -> f64 {
    let f = |a: f64| 2.0 * a * (span / (2.0 * a)).sinh() - length;
    let (mut lo, mut hi) = (1e-3, 1e3);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let a = 0.5 * (lo + hi);
    a * ((span / (2.0 * a)).cosh() - 1.0)
}

fn main() {
    let length = 2.0;
    println!("{:>6} {:>8} {:>8} {:>8} {:>7}", "span", "sag", "catenary", "arc", "ticks");
    for span in [1.0, 1.5, 1.8] {
        let mut c = init_cable("belt", length, 40, Vec3::zeros(), Vec3::new(span, 0.0, 0.0))
            .unwrap()
            .pinned_in_place();
        let r = static_solve(&mut c, &CableParams::default()).unwrap();
        let sag = -c.positions.iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
        println!(
            "{span:>6.2} {sag:>8.4} {:>8.4} {:>8.4} {:>7}",
            catenary_sag(span, length),
            c.arc_length(),
            r.ticks
        );
    }
}
