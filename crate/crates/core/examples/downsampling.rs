//! Equal-error weighting against downsampling the majority class to the
//! minority size.
//!
//! cargo run --example downsampling

use imbalance_werm::solver::{solve_downsampled, solve_equal_error_square, ProblemSpec};

pub fn run() {
    let s = 2.0;
    println!("{:>7} {:>10} {:>10} {:>10}", "delta", "weighted", "downsamp", "gap");
    for delta in [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.38] {
        let spec = ProblemSpec::square(s, 0.2, delta).expect("valid parameters");
        let ee = solve_equal_error_square(&spec).expect("delta < 2 pi_plus");
        let ds = solve_downsampled(&spec).expect("delta < 2 pi_plus");
        let r = ds.solution.risks(s).expect("risks");
        // downsampling gives a balanced problem, so it is equal-error too
        assert!((r.risk_plus - r.risk_minus).abs() < 1e-10);
        assert!(ee.wce <= r.wce);
        println!("{delta:>7} {:>10.6} {:>10.6} {:>10.2e}", ee.wce, r.wce, r.wce - ee.wce);
    }
}

#[allow(dead_code)]
fn main() {
    run();
}
