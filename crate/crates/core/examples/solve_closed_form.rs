//! Unweighted and weighted square-loss solutions at one point, with the
//! residuals of the defining system as a certificate.
//!
//! cargo run --example solve_closed_form

use imbalance_werm::solver::{solve_square, solve_unweighted_square, ProblemSpec};

pub fn run() {
    let spec = ProblemSpec::square(2.0, 0.2, 0.2).expect("valid parameters");

    let sol = solve_unweighted_square(&spec).expect("closed form");
    let r = sol.risks(spec.s()).expect("risks");
    println!("unweighted: alpha {:.6} gamma {:.6} b {:.6} lambda {:.6}", sol.alpha, sol.gamma, sol.b, sol.lambda);
    println!("  residual {:.1e}", sol.residual_norm());
    println!("  R+ {:.4}  R- {:.4}  WCE {:.4}", r.risk_plus, r.risk_minus, r.wce);
    assert!(sol.residual_norm() < 1e-12);
    // the majority class is classified better
    assert!(r.risk_minus < r.risk_plus);

    for rho in [2.0, 4.0, 10.0] {
        let sol = solve_square(&spec.with_rho(rho).expect("rho > 0")).expect("square solver");
        let r = sol.risks(spec.s()).expect("risks");
        println!("rho {rho:>4}: b {:+.5}  R+ {:.4}  R- {:.4}", sol.b, r.risk_plus, r.risk_minus);
    }
}

#[allow(dead_code)]
fn main() {
    run();
}
