//! Per-class errors along a grid of weight ratios: where they cross and where
//! the worst-class error is smallest.
//!
//! cargo run --example rho_sweep

use imbalance_werm::solver::{wce_quasiconvexity_check, ProblemSpec};
use imbalance_werm::Grid;

pub fn run() {
    let base = ProblemSpec::square(2.0, 0.2, 0.2).expect("valid parameters");
    let grid: Vec<ProblemSpec> =
        Grid::linear(1.0, 14.0, 53).values().into_iter().map(|rho| base.with_rho(rho).expect("rho > 0")).collect();
    let report = wce_quasiconvexity_check(&grid).expect("square solver");
    for (rho, r) in report.rhos.iter().zip(&report.risks).step_by(4) {
        println!("rho {rho:>5.2}  R+ {:.5}  R- {:.5}  WCE {:.5}", r.risk_plus, r.risk_minus, r.wce);
    }
    let cross = report.crossing_index.expect("errors cross");
    println!("crossing between rho {} and {}", report.rhos[cross], report.rhos[cross + 1]);
    println!("WCE argmin at rho {}, rho_tilde {:?}", report.argmin_rho(), report.rho_tilde);
    // the minority error bottoms out just before the crossing
    println!("R+ increases after grid indices {:?}", report.plus_increases);
    assert!(report.minus_decreases.is_empty());

    // above delta = 2 pi_plus no weight equalizes the errors
    let wide = ProblemSpec::square(2.0, 0.2, 0.5).expect("valid parameters");
    let grid: Vec<ProblemSpec> =
        Grid::log(1.0, 1000.0, 31).values().into_iter().map(|rho| wide.with_rho(rho).expect("rho > 0")).collect();
    let report = wce_quasiconvexity_check(&grid).expect("square solver");
    println!("delta 0.5: crossing {:?}, rho_tilde {:?}", report.crossing_index, report.rho_tilde);
    assert!(report.crossing_index.is_none());
}

#[allow(dead_code)]
fn main() {
    run();
}
