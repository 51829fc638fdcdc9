//! Four-equation system for an arbitrary convex loss.
//!
//! With `G ~ N(0, 1)`, `x+ = -alpha G + s gamma + b` (scale `lambda`) and
//! `x- = -alpha G + s gamma - b` (scale `lambda / rho`), the unknowns satisfy
//!
//! ```text
//! delta (alpha^2 - gamma^2) + 2 lambda^2 pi+ E[M_l(x+)] + 2 lambda^2 / rho^2 pi- E[M_l(x-)] = 0
//! delta gamma rho / lambda + pi+ rho s E[M_x(x+)] + pi- s E[M_x(x-)]                      = 0
//! -delta alpha rho / lambda + pi+ rho alpha E[M_xx(x+)] + pi- alpha E[M_xx(x-)]           = 0
//! pi+ rho E[M_x(x+)] - pi- E[M_x(x-)]                                                     = 0
//! ```
//!
//! where `M_x`, `M_l`, `M_xx` are the envelope partials in `x`, `lambda` and `x` twice.
//!
//! The iteration is a damped fixed point: `lambda` and `alpha^2` are read off
//! the third and first equations, and `(gamma, b)` take a Newton step on the
//! second and fourth, whose Jacobian is available exactly from `E[M_xx]`.
//! Iterates are continued along a geometric path in `rho` starting from the
//! unweighted square-loss closed form.

use nalgebra::{Matrix4, Vector4};

use super::{solve_unweighted_square, AsymptoticSolution, ProblemSpec};
use crate::error::{Error, Result};
use crate::expectation::{envelope_moments, EnvelopeMoments};
use crate::loss::LossModel;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub damping: f64,
    /// Sup-norm change between iterates below which the iteration may stop.
    pub step_tolerance: f64,
    /// Largest absolute residual accepted.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
    /// Newton iterations with a finite-difference Jacobian tried when the
    /// fixed point stalls.
    pub polish_iterations: usize,
    /// Largest multiplicative change of `rho` between continuation stages.
    pub continuation_factor: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            damping: 0.5,
            step_tolerance: 1e-10,
            residual_tolerance: 1e-9,
            max_iterations: 10_000,
            polish_iterations: 50,
            continuation_factor: 2.0,
        }
    }
}

const MIN_LAMBDA: f64 = 1e-12;
const MAX_CONSECUTIVE_PROJECTIONS: usize = 200;
/// Norm beyond which the iterates are taken to be running off to infinity,
/// which happens when the classes are linearly separable.
const MAX_ALPHA: f64 = 1e4;
/// Same for the envelope scale: a runaway `lambda` means every margin sits
/// where the loss is flat.
const MAX_LAMBDA: f64 = 1e10;

fn diverging(x: &[f64; 4]) -> Error {
    Error::infeasible(format!(
        "iterates diverge (alpha = {:.3e}, lambda = {:.3e}): no finite minimizer, the classes are asymptotically separable",
        x[0], x[2]
    ))
}

struct Moments {
    plus: EnvelopeMoments,
    minus: EnvelopeMoments,
}

fn moments(spec: &ProblemSpec, x: &[f64; 4]) -> Result<Moments> {
    let [alpha, gamma, lambda, b] = *x;
    let s = spec.s();
    let loss: &LossModel = spec.loss();
    Ok(Moments {
        plus: envelope_moments(loss, alpha, s * gamma + b, lambda)?,
        minus: envelope_moments(loss, alpha, s * gamma - b, lambda / spec.rho())?,
    })
}

fn residuals_from(spec: &ProblemSpec, x: &[f64; 4], m: &Moments) -> [f64; 4] {
    let [alpha, gamma, lambda, _] = *x;
    let (s, pp, pm, delta, rho) = (spec.s(), spec.pi_plus(), spec.pi_minus(), spec.delta(), spec.rho());
    [
        delta * (alpha * alpha - gamma * gamma)
            + 2.0 * lambda * lambda * pp * m.plus.d_lambda
            + 2.0 * lambda * lambda / (rho * rho) * pm * m.minus.d_lambda,
        delta * gamma * rho / lambda + pp * rho * s * m.plus.d_x + pm * s * m.minus.d_x,
        -delta * alpha * rho / lambda + pp * rho * alpha * m.plus.d_xx + pm * alpha * m.minus.d_xx,
        pp * rho * m.plus.d_x - pm * m.minus.d_x,
    ]
}

/// Residuals of the general system at `(alpha, gamma, lambda, b)`.
pub fn general_system_residuals(spec: &ProblemSpec, alpha: f64, gamma: f64, lambda: f64, b: f64) -> Result<[f64; 4]> {
    let x = [alpha, gamma, lambda, b];
    let m = moments(spec, &x)?;
    Ok(residuals_from(spec, &x, &m))
}

pub fn solve_general(spec: &ProblemSpec) -> Result<AsymptoticSolution> {
    solve_general_with(spec, &SolverOptions::default())
}

/// Continuation from the unweighted square-loss closed form to `spec.rho()`.
pub fn solve_general_with(spec: &ProblemSpec, opts: &SolverOptions) -> Result<AsymptoticSolution> {
    let base = ProblemSpec::square(spec.s(), spec.pi_plus(), spec.delta())?;
    let start = solve_unweighted_square(&base)?.as_array();

    let log_rho = spec.rho().ln();
    let stages = (log_rho.abs() / opts.continuation_factor.ln()).ceil().max(0.0) as usize;
    let mut x = start;
    for k in 1..stages {
        let rho_k = (log_rho * k as f64 / stages as f64).exp();
        x = iterate(&spec.with_rho(rho_k)?, x, opts)?;
    }
    // the last stage runs at exactly spec.rho()
    x = iterate(spec, x, opts)?;
    finish(spec, x)
}

/// Solves from an explicit initial iterate `[alpha, gamma, lambda, b]` with no
/// continuation in `rho`.
pub fn solve_general_from(spec: &ProblemSpec, init: [f64; 4], opts: &SolverOptions) -> Result<AsymptoticSolution> {
    let x = iterate(spec, init, opts)?;
    finish(spec, x)
}

fn finish(spec: &ProblemSpec, x: [f64; 4]) -> Result<AsymptoticSolution> {
    let [alpha, gamma, lambda, b] = x;
    Ok(AsymptoticSolution {
        alpha,
        gamma,
        b,
        lambda,
        residuals: general_system_residuals(spec, alpha, gamma, lambda, b)?,
    })
}

fn sup_norm(r: &[f64; 4]) -> f64 {
    r.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn iterate(spec: &ProblemSpec, init: [f64; 4], opts: &SolverOptions) -> Result<[f64; 4]> {
    let (s, pp, pm, delta, rho) = (spec.s(), spec.pi_plus(), spec.pi_minus(), spec.delta(), spec.rho());
    let w = opts.damping;
    let mut x = init;
    let mut projections = 0;
    let mut last_residuals = [f64::NAN; 4];

    for it in 0..opts.max_iterations {
        if x[0] > MAX_ALPHA || x[2] > MAX_LAMBDA {
            return Err(diverging(&x));
        }
        let m = match moments(spec, &x) {
            Ok(m) => m,
            Err(_) if x[0] > 10.0 * init[0].max(1.0) => return Err(diverging(&x)),
            Err(e) => return Err(e),
        };
        let res = residuals_from(spec, &x, &m);
        last_residuals = res;
        let [alpha, gamma, lambda, b] = x;

        let h_sum = pp * rho * m.plus.d_xx + pm * m.minus.d_xx;
        let h_diff = pp * rho * m.plus.d_xx - pm * m.minus.d_xx;
        let lambda_target = delta * rho / h_sum;
        let alpha_sq_target = gamma * gamma
            - 2.0 * lambda * lambda * (pp * m.plus.d_lambda + pm * m.minus.d_lambda / (rho * rho)) / delta;

        // Newton step on the gamma and b equations.
        let j11 = delta * rho / lambda + s * s * h_sum;
        let j12 = s * h_diff;
        let j22 = h_sum;
        let det = j11 * j22 - j12 * j12;
        let (step_gamma, step_b) = if det.abs() > 1e-300 {
            ((res[1] * j22 - j12 * res[3]) / det, (j11 * res[3] - j12 * res[1]) / det)
        } else {
            (0.0, 0.0)
        };

        let mut next = [
            (1.0 - w) * alpha + w * alpha_sq_target.max(0.0).sqrt(),
            gamma - w * step_gamma,
            (1.0 - w) * lambda + w * lambda_target,
            b - w * step_b,
        ];

        let mut projected = false;
        if !(next[2] > MIN_LAMBDA) {
            next[2] = MIN_LAMBDA.max(0.5 * lambda);
            projected = true;
        }
        if next[1].abs() > next[0] {
            next[0] = next[1].abs() * (1.0 + 1e-12);
            projected = true;
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NotConverged { iterations: it, last: x, residuals: res });
        }
        projections = if projected { projections + 1 } else { 0 };
        if projections > MAX_CONSECUTIVE_PROJECTIONS {
            return Err(Error::infeasible(format!(
                "iterates keep leaving lambda > 0, |gamma| <= alpha (last {next:?})"
            )));
        }

        let step = (0..4).fold(0.0_f64, |acc, i| acc.max((next[i] - x[i]).abs()));
        if step < opts.step_tolerance && sup_norm(&res) < opts.residual_tolerance {
            return Ok(x);
        }
        x = next;
    }

    // Fixed point stalled: Newton polish with a finite-difference Jacobian.
    match polish(spec, x, opts) {
        Some(polished) => Ok(polished),
        None => Err(Error::NotConverged { iterations: opts.max_iterations, last: x, residuals: last_residuals }),
    }
}

fn polish(spec: &ProblemSpec, mut x: [f64; 4], opts: &SolverOptions) -> Option<[f64; 4]> {
    let eval = |x: &[f64; 4]| -> Option<[f64; 4]> {
        let m = moments(spec, x).ok()?;
        Some(residuals_from(spec, x, &m))
    };
    let mut f = eval(&x)?;
    for _ in 0..opts.polish_iterations {
        if sup_norm(&f) < opts.residual_tolerance {
            return Some(x);
        }
        let mut jac = Matrix4::zeros();
        for j in 0..4 {
            let h = 1e-7 * x[j].abs().max(1e-3);
            let mut up = x;
            let mut down = x;
            up[j] += h;
            down[j] -= h;
            let (fu, fd) = (eval(&up)?, eval(&down)?);
            for i in 0..4 {
                jac[(i, j)] = (fu[i] - fd[i]) / (2.0 * h);
            }
        }
        let rhs = Vector4::from_column_slice(&f);
        let dx = jac.lu().solve(&rhs)?;
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let cand = [x[0] - t * dx[0], x[1] - t * dx[1], x[2] - t * dx[2], x[3] - t * dx[3]];
            if cand[2] > 0.0 && cand[1].abs() <= cand[0] {
                if let Some(fc) = eval(&cand) {
                    if sup_norm(&fc) < sup_norm(&f) {
                        x = cand;
                        f = fc;
                        improved = true;
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (sup_norm(&f) < opts.residual_tolerance).then_some(x)
}
