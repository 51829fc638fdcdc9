//! Finite-sample weighted fits against the asymptotic prediction.
//!
//! cargo run --release --example monte_carlo

use imbalance_werm::sim::{evaluate, fit_weighted_square, generate};
use imbalance_werm::solver::{solve_square, ProblemSpec};

pub fn run() {
    let n = 2000;
    for rho in [1.0, 4.0, 7.0] {
        let spec = ProblemSpec::square(2.0, 0.2, 0.2).expect("valid").with_rho(rho).expect("rho > 0");
        let theory = solve_square(&spec).expect("square solver");
        let t = theory.risks(spec.s()).expect("risks");
        let seeds = 0..4u64;
        let mut mean = [0.0; 5];
        for seed in seeds.clone() {
            let data = generate(&spec, n, seed).expect("n and delta give d >= 1");
            let fit = fit_weighted_square(&data, rho).expect("well-conditioned");
            let r = evaluate(&fit, data.mu()).expect("risks");
            for (m, v) in mean.iter_mut().zip([fit.alpha_hat, fit.gamma_hat, fit.bias, r.risk_plus, r.risk_minus]) {
                *m += v / seeds.clone().count() as f64;
            }
        }
        println!("rho {rho}:");
        println!(
            "  alpha {:.4} / {:.4}   gamma {:.4} / {:.4}   b {:+.4} / {:+.4}",
            mean[0], theory.alpha, mean[1], theory.gamma, mean[2], theory.b
        );
        println!(
            "  R+ {:.4} / {:.4}   R- {:.4} / {:.4}   (simulated / theory)",
            mean[3], t.risk_plus, mean[4], t.risk_minus
        );
    }
}

#[allow(dead_code)]
fn main() {
    run();
}
