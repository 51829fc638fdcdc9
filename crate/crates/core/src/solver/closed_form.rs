//! Explicit square-loss solutions: unweighted, equal-error and downsampled.

use serde::Serialize;

use super::{square_system_residuals, AsymptoticSolution, ProblemSpec};
use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::risk::q_function;

fn require_square(spec: &ProblemSpec, op: &str) -> Result<()> {
    if spec.loss().is_square() {
        Ok(())
    } else {
        Err(Error::domain(format!("{op} requires the square loss, got `{}`", spec.loss())))
    }
}

fn require_equal_error_regime(pi_plus: f64, delta: f64) -> Result<()> {
    if delta < 2.0 * pi_plus {
        Ok(())
    } else {
        Err(Error::infeasible(format!(
            "delta = {delta} >= 2 * pi_plus = {}: per-class risks never cross and the optimal weight diverges",
            2.0 * pi_plus
        )))
    }
}

/// Unweighted (`rho = 1`) square-loss solution.
pub fn solve_unweighted_square(spec: &ProblemSpec) -> Result<AsymptoticSolution> {
    require_square(spec, "solve_unweighted_square")?;
    if spec.rho() != 1.0 {
        return Err(Error::domain(format!("unweighted closed form needs rho = 1, got {}", spec.rho())));
    }
    let (s, pp, pm, delta) = (spec.s(), spec.pi_plus(), spec.pi_minus(), spec.delta());
    let imbalance = pm - pp;
    let c = 1.0 - imbalance * imbalance;
    let gamma = s * c / (1.0 + s * s * c);
    let lambda = delta / (1.0 - delta);
    let b = imbalance * (gamma * s - 1.0);
    let e_plus = gamma * s + b - 1.0;
    let e_minus = gamma * s - b - 1.0;
    let alpha = (lambda * (pp * e_plus * e_plus + pm * e_minus * e_minus) + gamma * gamma / (1.0 - delta)).sqrt();
    Ok(AsymptoticSolution {
        alpha,
        gamma,
        b,
        lambda,
        residuals: square_system_residuals(spec, alpha, gamma, lambda, b),
    })
}

/// Weight ratio that equalizes the two asymptotic per-class risks:
/// the prior ratio plus an offset growing with `delta`.
///
/// Defined only for `delta < 2 * pi_plus`; independent of `s`.
pub fn rho_tilde(s: f64, pi_plus: f64, delta: f64) -> Result<f64> {
    // validates the arguments
    ProblemSpec::square(s, pi_plus, delta)?;
    require_equal_error_regime(pi_plus, delta)?;
    let prior_ratio = (1.0 - pi_plus) / pi_plus;
    Ok(prior_ratio + (prior_ratio - 1.0) * delta / (2.0 * pi_plus - delta))
}

/// `Q(s^2 sqrt(1 - D) / sqrt(D + s^2))`, the common per-class error of a
/// zero-bias square-loss solution with effective ratio `D`.
pub fn equal_error_wce(s: f64, big_delta: f64) -> f64 {
    q_function(s * s * (1.0 - big_delta).sqrt() / (big_delta + s * s).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EqualErrorSolution {
    pub solution: AsymptoticSolution,
    pub rho_tilde: f64,
    /// `delta / (4 pi_plus) + delta / (4 pi_minus)`
    pub big_delta: f64,
    pub wce: f64,
}

/// Square-loss solution at `rho = rho_tilde`; `spec.rho()` is ignored.
pub fn solve_equal_error_square(spec: &ProblemSpec) -> Result<EqualErrorSolution> {
    require_square(spec, "solve_equal_error_square")?;
    let (s, pp, pm, delta) = (spec.s(), spec.pi_plus(), spec.pi_minus(), spec.delta());
    let rho = rho_tilde(s, pp, delta)?;
    let big_delta = delta / (4.0 * pp) + delta / (4.0 * pm);
    assert!(big_delta < 1.0, "Delta >= 1 despite delta < 2 pi_plus");

    let gamma = s / (1.0 + s * s);
    let dev = gamma * s - 1.0;
    let alpha = (big_delta / (1.0 - big_delta) * dev * dev + gamma * gamma / (1.0 - big_delta)).sqrt();
    let lambda = delta / (2.0 * pp - delta);
    let b = 0.0;
    let at_rho = spec.with_rho(rho)?;
    Ok(EqualErrorSolution {
        solution: AsymptoticSolution {
            alpha,
            gamma,
            b,
            lambda,
            residuals: square_system_residuals(&at_rho, alpha, gamma, lambda, b),
        },
        rho_tilde: rho,
        big_delta,
        wce: equal_error_wce(s, big_delta),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DownsampledSolution {
    pub solution: AsymptoticSolution,
    /// Ratio of the downsampled problem, `delta / (2 pi_plus)`.
    pub delta_tilde: f64,
}

/// Majority class downsampled to the minority size: a balanced unweighted
/// problem at the inflated ratio `delta / (2 pi_plus)`.
pub fn solve_downsampled(spec: &ProblemSpec) -> Result<DownsampledSolution> {
    require_square(spec, "solve_downsampled")?;
    let (pp, delta) = (spec.pi_plus(), spec.delta());
    require_equal_error_regime(pp, delta)?;
    let delta_tilde = delta / (2.0 * pp);
    let reduced = ProblemSpec::new(spec.s(), 0.5, delta_tilde, 1.0, LossModel::Square)?;
    Ok(DownsampledSolution { solution: solve_unweighted_square(&reduced)?, delta_tilde })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn balanced_unweighted_hand_values() {
        let sol = solve_unweighted_square(&ProblemSpec::square(2.0, 0.5, 0.2).unwrap()).unwrap();
        assert_abs_diff_eq!(sol.gamma, 0.4, epsilon = 1e-15);
        assert_eq!(sol.b, 0.0);
        assert_abs_diff_eq!(sol.lambda, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn population_limit_lambda() {
        let sol = solve_unweighted_square(&ProblemSpec::square(2.0, 0.2, 1e-9).unwrap()).unwrap();
        assert!(sol.lambda < 2e-9);
    }

    #[test]
    fn majority_favoured_bias() {
        let sol = solve_unweighted_square(&ProblemSpec::square(2.0, 0.2, 0.2).unwrap()).unwrap();
        assert!(sol.gamma * 2.0 < 1.0);
        assert!(sol.b < 0.0);
        let r = sol.risks(2.0).unwrap();
        assert!(r.risk_minus < r.risk_plus);
    }

    #[test]
    fn unweighted_needs_unit_rho() {
        let spec = ProblemSpec::square(2.0, 0.2, 0.2).unwrap().with_rho(2.0).unwrap();
        assert!(solve_unweighted_square(&spec).is_err());
    }

    #[test]
    fn rho_tilde_values() {
        assert_eq!(rho_tilde(2.0, 0.2, 0.2).unwrap(), 7.0);
        for &delta in &[0.01, 0.3, 0.99] {
            assert_abs_diff_eq!(rho_tilde(3.0, 0.5, delta).unwrap(), 1.0, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(rho_tilde(1.0, 0.2, 1e-12).unwrap(), 4.0, epsilon = 1e-10);
        assert!(matches!(rho_tilde(2.0, 0.2, 0.4), Err(Error::Infeasible(_))));
        assert!(matches!(rho_tilde(2.0, 0.2, 0.5), Err(Error::Infeasible(_))));
    }

    #[test]
    fn equal_error_hand_values() {
        let ee = solve_equal_error_square(&ProblemSpec::square(2.0, 0.2, 0.2).unwrap()).unwrap();
        assert_abs_diff_eq!(ee.big_delta, 0.3125, epsilon = 1e-15);
        assert_eq!(ee.rho_tilde, 7.0);
        assert_eq!(ee.solution.b, 0.0);
        assert!((ee.wce - 0.0551).abs() < 5e-4);
        assert!(ee.solution.residual_norm() < 1e-12);
        let r = ee.solution.risks(2.0).unwrap();
        assert_abs_diff_eq!(r.wce, ee.wce, epsilon = 1e-12);
    }

    #[test]
    fn equal_error_population_limit() {
        let ee = solve_equal_error_square(&ProblemSpec::square(2.0, 0.3, 1e-10).unwrap()).unwrap();
        assert_abs_diff_eq!(ee.wce, q_function(2.0), epsilon = 1e-9);
    }

    #[test]
    fn equal_error_wce_vanishes_with_separation() {
        let mut last = 1.0;
        for s in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let ee = solve_equal_error_square(&ProblemSpec::square(s, 0.2, 0.2).unwrap()).unwrap();
            assert!(ee.wce < last);
            last = ee.wce;
        }
        assert!(last < 1e-30);
    }

    #[test]
    fn downsampled_transform() {
        let ds = solve_downsampled(&ProblemSpec::square(2.0, 0.2, 0.2).unwrap()).unwrap();
        assert_abs_diff_eq!(ds.delta_tilde, 0.5, epsilon = 1e-15);
        assert_eq!(ds.solution.b, 0.0);
        assert_abs_diff_eq!(ds.solution.lambda, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn downsampled_balanced_is_unweighted() {
        let spec = ProblemSpec::square(1.5, 0.5, 0.4).unwrap();
        let ds = solve_downsampled(&spec).unwrap();
        assert_eq!(ds.solution, solve_unweighted_square(&spec).unwrap());
    }

    #[test]
    fn downsampling_is_dominated() {
        let spec = ProblemSpec::square(2.0, 0.2, 0.2).unwrap();
        let ee = solve_equal_error_square(&spec).unwrap();
        let ds = solve_downsampled(&spec).unwrap();
        assert!(ds.solution.risks(2.0).unwrap().wce >= ee.wce);
    }

    #[test]
    fn infeasible_regime() {
        let spec = ProblemSpec::square(2.0, 0.2, 0.5).unwrap();
        assert!(matches!(solve_equal_error_square(&spec), Err(Error::Infeasible(_))));
        assert!(matches!(solve_downsampled(&spec), Err(Error::Infeasible(_))));
    }
}
