//! When does the equal-error weight beat unweighted training? Below a
//! threshold on the squared mean separation.
//!
//! cargo run --example separation

use imbalance_werm::solver::{compare_weighted_unweighted, separation_threshold, ProblemSpec};

pub fn run() {
    let (pi_plus, delta) = (0.2, 0.2);
    let t = separation_threshold(pi_plus, delta).expect("defined");
    println!("threshold s^2 = {t:.4} (s = {:.4})", t.sqrt());
    for s in [1.0, 2.0, 3.0, 3.5, 3.6, 4.0, 6.0] {
        let spec = ProblemSpec::square(s, pi_plus, delta).expect("valid parameters");
        let v = compare_weighted_unweighted(&spec).expect("threshold and direct comparison agree");
        println!(
            "s {s:<4} weighted {:.5}  unweighted {:.5}  weighted wins: {}",
            v.wce_weighted, v.wce_unweighted, v.weighted_wins
        );
        assert_eq!(v.weighted_wins, s * s <= t);
    }
}

#[allow(dead_code)]
fn main() {
    run();
}
