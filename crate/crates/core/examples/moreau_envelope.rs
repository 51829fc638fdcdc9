//! Moreau envelopes, proximal points and their derivatives.
//!
//! cargo run --example moreau_envelope

use imbalance_werm::{moreau_envelope, LossModel};

pub fn run() {
    let exp_loss = LossModel::custom("exponential", |z: f64| (-z).exp()).expect("convex");
    for loss in [LossModel::Square, LossModel::Logistic, exp_loss] {
        println!("{}:", loss.name());
        for (x, lambda) in [(-2.0, 0.5), (0.0, 1.0), (1.5, 4.0)] {
            let e = moreau_envelope(&loss, x, lambda).expect("finite input");
            println!(
                "  x {x:>4} lambda {lambda}: M {:.6} prox {:+.6} dM/dx {:+.6} dM/dlambda {:+.6}",
                e.value, e.prox, e.d_x, e.d_lambda
            );
            // dM/dlambda = -(dM/dx)^2 / 2
            assert!((e.d_lambda + 0.5 * e.d_x * e.d_x).abs() < 1e-6);
        }
    }
}

#[allow(dead_code)]
fn main() {
    run();
}
