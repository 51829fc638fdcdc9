//! Asymptotic characterization of class-weighted ERM.
//!
//! In the proportional limit `d/n -> delta` the learned classifier is summarized by
//! four scalars: the norm `alpha`, the component `gamma` along the class mean, the
//! bias `b` and the envelope scale `lambda`. This module solves for them:
//!
//! - [`solve_general`]: any convex loss, Gaussian expectations by quadrature;
//! - [`solve_square`]: square loss, the same system with the expectations done
//!   in closed form;
//! - [`solve_unweighted_square`], [`solve_equal_error_square`] and
//!   [`solve_downsampled`]: fully explicit special cases;
//! - [`compare_weighted_unweighted`] and [`wce_quasiconvexity_check`]: analyses
//!   built on top of the solvers.

mod analysis;
mod closed_form;
mod general;
mod square;

pub use analysis::{
    compare_weighted_unweighted, separation_threshold, wce_quasiconvexity_check, ComparisonVerdict,
    QuasiconvexityReport,
};
pub use closed_form::{
    equal_error_wce, rho_tilde, solve_downsampled, solve_equal_error_square, solve_unweighted_square,
    DownsampledSolution, EqualErrorSolution,
};
pub use general::{general_system_residuals, solve_general, solve_general_from, solve_general_with, SolverOptions};
pub use square::{solve_square, square_system_residuals};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::risk::{class_risks, ClassRisks};

/// A scalar problem instance.
///
/// Class `+1` is the minority (`pi_plus <= 1/2`); `rho` is the ratio of the
/// minority weight to the majority weight.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    s: f64,
    pi_plus: f64,
    delta: f64,
    rho: f64,
    loss: LossModel,
}

impl ProblemSpec {
    pub fn new(s: f64, pi_plus: f64, delta: f64, rho: f64, loss: LossModel) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("signal strength s must be positive, got {s}")));
        }
        if !(pi_plus > 0.0 && pi_plus <= 0.5) {
            return Err(Error::domain(format!("minority prior must lie in (0, 0.5], got {pi_plus}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("overparameterization ratio must lie in (0, 1), got {delta}")));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::domain(format!("weight ratio must be positive, got {rho}")));
        }
        Ok(ProblemSpec { s, pi_plus, delta, rho, loss })
    }

    /// Square loss, unit weight ratio.
    pub fn square(s: f64, pi_plus: f64, delta: f64) -> Result<Self> {
        Self::new(s, pi_plus, delta, 1.0, LossModel::Square)
    }

    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.s, self.pi_plus, self.delta, rho, self.loss.clone())
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.s, self.pi_plus, delta, self.rho, self.loss.clone())
    }

    pub fn with_pi_plus(&self, pi_plus: f64) -> Result<Self> {
        Self::new(self.s, pi_plus, self.delta, self.rho, self.loss.clone())
    }

    pub fn with_s(&self, s: f64) -> Result<Self> {
        Self::new(s, self.pi_plus, self.delta, self.rho, self.loss.clone())
    }

    pub fn with_loss(&self, loss: LossModel) -> Self {
        ProblemSpec { loss, ..self.clone() }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn pi_plus(&self) -> f64 {
        self.pi_plus
    }

    pub fn pi_minus(&self) -> f64 {
        1.0 - self.pi_plus
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn loss(&self) -> &LossModel {
        &self.loss
    }
}

/// Solved scalars of the asymptotic system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AsymptoticSolution {
    pub alpha: f64,
    pub gamma: f64,
    pub b: f64,
    pub lambda: f64,
    /// Residuals of the defining system, ordered (alpha, gamma, lambda, b) equation.
    pub residuals: [f64; 4],
}

impl AsymptoticSolution {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().fold(0.0_f64, |m, r| m.max(r.abs()))
    }

    pub fn risks(&self, s: f64) -> Result<ClassRisks> {
        class_risks(self.alpha, self.gamma, self.b, s)
    }

    /// `[alpha, gamma, lambda, b]`
    pub fn as_array(&self) -> [f64; 4] {
        [self.alpha, self.gamma, self.lambda, self.b]
    }
}
