//! Standard-Gaussian expectations of Moreau-envelope derivatives evaluated at
//! `-alpha * G + shift`, the building blocks of the asymptotic system.

use crate::error::{Error, Result};
use crate::loss::{moreau_envelope, LossModel};
use crate::quadrature::standard_rule;

/// Default number of quadrature nodes; doubled up to [`MAX_NODES`] on disagreement.
pub const BASE_NODES: usize = 80;
pub const MAX_NODES: usize = 320;
/// Largest tolerated change between successive node doublings.
pub const DOUBLING_TOLERANCE: f64 = 1e-8;
/// Doubling tolerance for losses without an analytic `l''`, whose finite-difference
/// curvature carries noise of order 1e-7 at every node.
pub const FD_DOUBLING_TOLERANCE: f64 = 1e-6;

/// Which envelope derivative to average.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    /// `dM/dx`
    DX,
    /// `dM/dlambda`
    DLambda,
    /// `d^2M/dx^2`
    DXX,
}

#[derive(Clone, Debug)]
pub struct ExpectationRequest<'a> {
    pub loss: &'a LossModel,
    /// Coefficient of `G`, non-negative.
    pub alpha: f64,
    /// Deterministic part of the argument, `s*gamma + b` or `s*gamma - b`.
    pub shift: f64,
    pub lambda: f64,
    pub which: Derivative,
}

/// The three averaged derivatives at one `(alpha, shift, lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeMoments {
    pub d_x: f64,
    pub d_lambda: f64,
    pub d_xx: f64,
}

impl EnvelopeMoments {
    pub fn get(&self, which: Derivative) -> f64 {
        match which {
            Derivative::DX => self.d_x,
            Derivative::DLambda => self.d_lambda,
            Derivative::DXX => self.d_xx,
        }
    }
}

pub fn expect_envelope_derivative(req: &ExpectationRequest<'_>) -> Result<f64> {
    Ok(envelope_moments(req.loss, req.alpha, req.shift, req.lambda)?.get(req.which))
}

/// Computes all three expectations, sharing one prox solve per node.
///
/// Square loss uses the closed-form Gaussian moments; everything else goes
/// through Gauss-Hermite quadrature with node doubling.
pub fn envelope_moments(loss: &LossModel, alpha: f64, shift: f64, lambda: f64) -> Result<EnvelopeMoments> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be non-negative, got {alpha}")));
    }
    if !shift.is_finite() {
        return Err(Error::domain(format!("shift must be finite, got {shift}")));
    }
    if loss.is_square() {
        return Ok(square_moments(alpha, shift, lambda));
    }
    if alpha == 0.0 {
        let e = moreau_envelope(loss, shift, lambda)?;
        return Ok(EnvelopeMoments { d_x: e.d_x, d_lambda: e.d_lambda, d_xx: e.d_xx });
    }
    quadrature_moments(loss, alpha, shift, lambda)
}

/// `E[(x-1)/(1+l)]`, `E[-(x-1)^2/(2(1+l)^2)]`, `1/(1+l)` at `x = -alpha G + shift`.
pub fn square_moments(alpha: f64, shift: f64, lambda: f64) -> EnvelopeMoments {
    let denom = 1.0 + lambda;
    let dev = shift - 1.0;
    EnvelopeMoments {
        d_x: dev / denom,
        d_lambda: -(dev * dev + alpha * alpha) / (2.0 * denom * denom),
        d_xx: 1.0 / denom,
    }
}

/// Quadrature with a fixed node count; no doubling. Exposed for convergence tests.
pub fn quadrature_moments_with(
    loss: &LossModel,
    alpha: f64,
    shift: f64,
    lambda: f64,
    nodes: usize,
) -> Result<EnvelopeMoments> {
    let rule = standard_rule(nodes);
    let mut acc = EnvelopeMoments { d_x: 0.0, d_lambda: 0.0, d_xx: 0.0 };
    for (&g, &w) in rule.nodes().iter().zip(rule.weights()) {
        let e = moreau_envelope(loss, -alpha * g + shift, lambda)?;
        acc.d_x += w * e.d_x;
        acc.d_lambda += w * e.d_lambda;
        acc.d_xx += w * e.d_xx;
    }
    Ok(acc)
}

fn quadrature_moments(loss: &LossModel, alpha: f64, shift: f64, lambda: f64) -> Result<EnvelopeMoments> {
    let tolerance = if loss.second_derivative(0.0).is_some() { DOUBLING_TOLERANCE } else { FD_DOUBLING_TOLERANCE };
    let mut coarse = quadrature_moments_with(loss, alpha, shift, lambda, BASE_NODES)?;
    let mut nodes = BASE_NODES;
    loop {
        nodes *= 2;
        let fine = quadrature_moments_with(loss, alpha, shift, lambda, nodes)?;
        let gap = max_gap(&coarse, &fine);
        if gap <= tolerance {
            return Ok(fine);
        }
        if nodes >= MAX_NODES {
            return Err(Error::numeric(format!("Gauss-Hermite quadrature at {nodes} nodes"), gap));
        }
        coarse = fine;
    }
}

fn max_gap(a: &EnvelopeMoments, b: &EnvelopeMoments) -> f64 {
    (a.d_x - b.d_x).abs().max((a.d_lambda - b.d_lambda).abs()).max((a.d_xx - b.d_xx).abs())
}
