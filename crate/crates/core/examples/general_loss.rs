//! The general solver with logistic and user-supplied losses. With the square
//! loss it agrees with the explicit solver.
//!
//! cargo run --example general_loss

use imbalance_werm::solver::{solve_general, solve_general_with, solve_square, ProblemSpec, SolverOptions};
use imbalance_werm::LossModel;

pub fn run() {
    let logistic = ProblemSpec::new(1.0, 0.2, 0.1, 4.0, LossModel::Logistic).expect("valid parameters");
    let sol = solve_general(&logistic).expect("overlapping classes");
    let r = sol.risks(logistic.s()).expect("risks");
    println!("logistic: alpha {:.5} gamma {:.5} b {:+.5} lambda {:.5}", sol.alpha, sol.gamma, sol.b, sol.lambda);
    println!("  residual {:.1e}  R+ {:.4}  R- {:.4}", sol.residual_norm(), r.risk_plus, r.risk_minus);

    // user-supplied losses go through the numeric prox and quadrature
    let plain = LossModel::custom("exponential", |z: f64| (-z).exp()).expect("convex");
    let smooth =
        LossModel::custom_smooth("exponential", |z: f64| (-z).exp(), |z: f64| -(-z).exp(), |z: f64| (-z).exp())
            .expect("consistent derivatives");
    // finite-difference derivatives put a floor near 1e-7 under the residuals
    let loose = SolverOptions { residual_tolerance: 1e-6, ..SolverOptions::default() };
    let a = solve_general_with(&logistic.with_loss(plain), &loose).expect("solvable");
    let b = solve_general(&logistic.with_loss(smooth)).expect("solvable");
    println!("exponential: alpha {:.5} gamma {:.5} b {:+.5}", b.alpha, b.gamma, b.b);
    println!("  finite-difference derivatives move alpha by {:.1e}", (a.alpha - b.alpha).abs());

    // a kink in l'' defeats Gauss-Hermite refinement; this is reported, not averaged over
    let hinge = LossModel::custom("squared_hinge", |z: f64| 0.5 * (1.0 - z).max(0.0).powi(2)).expect("convex");
    match solve_general(&logistic.with_loss(hinge)) {
        Ok(sol) => println!("squared hinge: alpha {:.5} gamma {:.5} b {:+.5}", sol.alpha, sol.gamma, sol.b),
        Err(e) => println!("squared hinge: {e}"),
    }

    let square = ProblemSpec::square(2.0, 0.2, 0.2).expect("valid").with_rho(5.0).expect("rho > 0");
    let g = solve_general(&square).expect("general");
    let q = solve_square(&square).expect("explicit");
    let gap = g.as_array().iter().zip(q.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("square loss, general vs explicit: max gap {gap:.1e}");
    assert!(gap < 1e-6);

    // widely separated, high-dimensional data: the logistic minimizer escapes to infinity
    let separable = ProblemSpec::new(2.0, 0.2, 0.2, 1.0, LossModel::Logistic).expect("valid");
    let err = solve_general(&separable).expect_err("separable");
    println!("s = 2, delta = 0.2: {err}");
}

#[allow(dead_code)]
fn main() {
    run();
}
