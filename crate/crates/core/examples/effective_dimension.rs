//! From a feature matrix to a weight ratio: estimate the effective dimension,
//! turn it into a ratio delta = d_eff / n and read off the equal-error weight.
//! Any feature export (one row per sample, a header line) works in place of
//! the synthetic matrix built here.
//!
//! cargo run --example effective_dimension

use imbalance_werm::effdim::{effective_dim, FeatureMatrix, DEFAULT_THRESHOLD};
use imbalance_werm::solver::rho_tilde;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn run() {
    // 2000 samples of 64 features, variance concentrated in 8 directions
    let (n, dim) = (2000, 64);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let scale = |j: usize| if j < 8 { 10.0 / (1.0 + j as f64) } else { 0.02 };
    let values = DMatrix::from_fn(n, dim, |_, j| scale(j) * rng.sample::<f64, _>(StandardNormal));
    let features = FeatureMatrix::new(values).expect("finite, n >= 2");

    let report = effective_dim(&features, DEFAULT_THRESHOLD).expect("non-degenerate");
    println!("effective dimension {} of {dim} at threshold {}", report.effective_dim, report.threshold);
    for (k, c) in report.cumulative_variance_fraction.iter().take(10).enumerate() {
        println!("  k {:>2}: {c:.5}", k + 1);
    }

    let pi_plus = 0.1;
    let delta = report.effective_dim as f64 / n as f64;
    let rho = rho_tilde(1.0, pi_plus, delta).expect("delta < 2 pi_plus");
    println!("delta = {delta:.4}, pi_plus = {pi_plus}: weight the minority class by {rho:.4} (prior ratio 9)");
}

#[allow(dead_code)]
fn main() {
    run();
}
