//! Square-loss system, where every Gaussian expectation is explicit.
//!
//! The four equations decouple: the `lambda` equation involves `lambda` alone
//! and reduces to a quadratic; given `lambda`, the `gamma` and `b` equations are
//! linear; the `alpha` equation then gives `alpha^2` directly.

use super::{AsymptoticSolution, ProblemSpec};
use crate::error::{Error, Result};

/// Residuals of the square-loss system, written as `lhs - rhs` and ordered
/// (alpha, gamma, lambda, b) equation.
pub fn square_system_residuals(spec: &ProblemSpec, alpha: f64, gamma: f64, lambda: f64, b: f64) -> [f64; 4] {
    let (s, pp, pm, delta, rho) = (spec.s(), spec.pi_plus(), spec.pi_minus(), spec.delta(), spec.rho());
    let e_plus = s * gamma + b - 1.0;
    let e_minus = s * gamma - b - 1.0;
    let t_plus = lambda / (1.0 + lambda);
    let t_minus = lambda / (rho + lambda);
    [
        pp * t_plus * t_plus * (e_plus * e_plus + alpha * alpha)
            + pm * t_minus * t_minus * (e_minus * e_minus + alpha * alpha)
            - delta * (alpha * alpha - gamma * gamma),
        pp * s * e_plus * t_plus + pm * s * e_minus * t_minus + delta * gamma,
        pp * t_plus + pm * t_minus - delta,
        pp * e_plus / (1.0 + lambda) - pm * e_minus / (rho + lambda),
    ]
}

/// Solves the square-loss system for any weight ratio.
pub fn solve_square(spec: &ProblemSpec) -> Result<AsymptoticSolution> {
    if !spec.loss().is_square() {
        return Err(Error::domain(format!("solve_square requires the square loss, got `{}`", spec.loss())));
    }
    let (s, pp, pm, delta, rho) = (spec.s(), spec.pi_plus(), spec.pi_minus(), spec.delta(), spec.rho());

    // pp*l/(1+l) + pm*l/(rho+l) = delta  <=>  A l^2 + B l - C = 0
    let a = 1.0 - delta;
    let bq = pp * rho + pm - delta * (1.0 + rho);
    let c = delta * rho;
    let disc = (bq * bq + 4.0 * a * c).sqrt();
    let lambda = if bq > 0.0 { 2.0 * c / (bq + disc) } else { (disc - bq) / (2.0 * a) };

    let a_plus = pp / (1.0 + lambda);
    let a_minus = pm / (rho + lambda);
    let sum = a_plus + a_minus;
    let diff = a_plus - a_minus;
    // [ s*lambda*s*sum + delta   s*lambda*diff ] [gamma]   [ s*lambda*sum ]
    // [ s*diff                   sum           ] [  b  ] = [ diff         ]
    let m11 = s * s * lambda * sum + delta;
    let m12 = s * lambda * diff;
    let m21 = s * diff;
    let m22 = sum;
    let det = m11 * m22 - m12 * m21;
    if det.abs() < 1e-300 {
        return Err(Error::numeric("square-loss linear block", det));
    }
    let r1 = s * lambda * sum;
    let r2 = diff;
    let gamma = (r1 * m22 - m12 * r2) / det;
    let b = (m11 * r2 - m21 * r1) / det;

    let t_plus = lambda / (1.0 + lambda);
    let t_minus = lambda / (rho + lambda);
    let c_plus = pp * t_plus * t_plus;
    let c_minus = pm * t_minus * t_minus;
    let e_plus = s * gamma + b - 1.0;
    let e_minus = s * gamma - b - 1.0;
    let coef = delta - c_plus - c_minus;
    if coef <= 0.0 {
        return Err(Error::infeasible(format!("alpha equation has no positive solution (coefficient {coef:e})")));
    }
    let alpha = ((delta * gamma * gamma + c_plus * e_plus * e_plus + c_minus * e_minus * e_minus) / coef).sqrt();

    Ok(AsymptoticSolution {
        alpha,
        gamma,
        b,
        lambda,
        residuals: square_system_residuals(spec, alpha, gamma, lambda, b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_unweighted_square;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unweighted_matches_closed_form() {
        let spec = ProblemSpec::square(2.0, 0.2, 0.2).unwrap();
        let a = solve_square(&spec).unwrap();
        let c = solve_unweighted_square(&spec).unwrap();
        assert_abs_diff_eq!(a.alpha, c.alpha, epsilon = 1e-9);
        assert_abs_diff_eq!(a.gamma, c.gamma, epsilon = 1e-9);
        assert_abs_diff_eq!(a.b, c.b, epsilon = 1e-9);
        assert_abs_diff_eq!(a.lambda, c.lambda, epsilon = 1e-9);
        assert!(a.residual_norm() < 1e-11);
    }

    #[test]
    fn balanced_gamma() {
        for &(s, delta) in &[(0.5, 0.1), (2.0, 0.3), (3.5, 0.8)] {
            let sol = solve_square(&ProblemSpec::square(s, 0.5, delta).unwrap()).unwrap();
            assert_abs_diff_eq!(sol.gamma, s / (1.0 + s * s), epsilon = 1e-12);
            assert_abs_diff_eq!(sol.b, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn lambda_at_unit_weight() {
        let sol = solve_square(&ProblemSpec::square(1.3, 0.3, 0.5).unwrap()).unwrap();
        assert_abs_diff_eq!(sol.lambda, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn weighted_residuals_vanish() {
        for &rho in &[0.3, 1.0, 4.0, 7.0, 50.0, 1e3] {
            for &delta in &[0.05, 0.2, 0.5, 0.9] {
                let spec = ProblemSpec::square(2.0, 0.2, delta).unwrap().with_rho(rho).unwrap();
                let sol = solve_square(&spec).unwrap();
                assert!(sol.residual_norm() < 1e-11, "rho={rho} delta={delta}: {sol:?}");
                assert!(sol.gamma.abs() <= sol.alpha);
            }
        }
    }

    #[test]
    fn rejects_other_losses() {
        let spec = ProblemSpec::new(2.0, 0.2, 0.2, 1.0, crate::LossModel::Logistic).unwrap();
        assert!(solve_square(&spec).is_err());
    }
}
