//! The weight ratio that equalizes the two class errors, and the common
//! error it achieves.
//!
//! cargo run --example equal_error_weight

use imbalance_werm::solver::{rho_tilde, solve_equal_error_square, ProblemSpec};
use imbalance_werm::Error;

pub fn run() {
    let spec = ProblemSpec::square(2.0, 0.2, 0.2).expect("valid parameters");
    let ee = solve_equal_error_square(&spec).expect("delta < 2 pi_plus");
    let r = ee.solution.risks(spec.s()).expect("risks");
    println!("rho_tilde {}  (prior ratio {})", ee.rho_tilde, spec.pi_minus() / spec.pi_plus());
    println!("WCE {:.6}  R+ {:.6}  R- {:.6}  b {}", ee.wce, r.risk_plus, r.risk_minus, ee.solution.b);
    assert_eq!(ee.rho_tilde, 7.0);
    assert!((r.risk_plus - r.risk_minus).abs() < 1e-12);

    // the offset over the prior ratio grows with delta and blows up at 2 pi_plus
    for delta in [0.01, 0.1, 0.2, 0.3, 0.39] {
        println!("delta {delta:<5} rho_tilde {:.3}", rho_tilde(2.0, 0.2, delta).expect("in range"));
    }
    match rho_tilde(2.0, 0.2, 0.5) {
        Err(Error::Infeasible(msg)) => println!("delta 0.5: {msg}"),
        other => panic!("expected an infeasible weight, got {other:?}"),
    }
}

#[allow(dead_code)]
fn main() {
    run();
}
