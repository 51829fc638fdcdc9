//! Gauss-Hermite rules normalized for expectations over a standard normal.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights with `E[f(G)] ~ sum_i w_i f(x_i)` for `G ~ N(0, 1)`.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Builds an `n`-point rule. Starting points come from the eigenvalues of
    /// the Jacobi matrix; each node is then refined by Newton iteration on the
    /// orthonormal Hermite recurrence, which also yields its weight.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let jacobi =
            DMatrix::from_fn(n, n, |i, j| if i + 1 == j || j + 1 == i { (i.max(j) as f64 / 2.0).sqrt() } else { 0.0 });
        let mut guesses: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        guesses.sort_by(|a, b| b.total_cmp(a));

        let scale = std::f64::consts::PI.sqrt().recip();
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for guess in guesses {
            let (z, w) = refine_root(n, guess);
            nodes.push(z * std::f64::consts::SQRT_2);
            weights.push(w * scale);
        }
        GaussHermite { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `E[f(G)]` for `G ~ N(0, 1)`.
    pub fn expect<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Newton refinement of a root of the degree-`n` Hermite polynomial (weight
/// `exp(-x^2)`), returning the root and its quadrature weight.
fn refine_root(n: usize, mut z: f64) -> (f64, f64) {
    const PI_M4: f64 = 0.751_125_544_464_942_5; // pi^(-1/4)
    const RESCALE: f64 = 1e100;
    let nf = n as f64;
    let mut pp = 1.0;
    let mut log_scale = 0.0;
    for _ in 0..20 {
        // renormalized on the fly: far out in the tail the unweighted
        // polynomials overflow for large n
        let mut p1 = PI_M4;
        let mut p2 = 0.0;
        log_scale = 0.0;
        for j in 0..n {
            let p3 = p2;
            p2 = p1;
            let jf = j as f64;
            p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            if p1.abs() > RESCALE {
                p1 /= RESCALE;
                p2 /= RESCALE;
                log_scale += RESCALE.ln();
            }
        }
        pp = (2.0 * nf).sqrt() * p2;
        let z1 = z;
        z = z1 - p1 / pp;
        if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    let weight = (std::f64::consts::LN_2 - 2.0 * pp.abs().ln() - 2.0 * log_scale).exp();
    (z, weight)
}

/// Shared 80-, 160- and 320-point rules.
pub fn standard_rule(n: usize) -> &'static GaussHermite {
    static R80: OnceLock<GaussHermite> = OnceLock::new();
    static R160: OnceLock<GaussHermite> = OnceLock::new();
    static R320: OnceLock<GaussHermite> = OnceLock::new();
    match n {
        80 => R80.get_or_init(|| GaussHermite::new(80)),
        160 => R160.get_or_init(|| GaussHermite::new(160)),
        320 => R320.get_or_init(|| GaussHermite::new(320)),
        _ => panic!("no cached Gauss-Hermite rule with {n} nodes"),
    }
}
