//! Per-class test risks of a linear classifier under the two-Gaussian model.
//!
//! With `alpha = |theta|`, `gamma = mu^T theta / |mu|` and `s = |mu|`, a point of
//! class `+1` is misclassified with probability `Q((gamma s + b) / alpha)` and a
//! point of class `-1` with probability `Q((gamma s - b) / alpha)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard normal tail `P(Z > t)`.
pub fn q_function(t: f64) -> f64 {
    0.5 * libm::erfc(t * std::f64::consts::FRAC_1_SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassRisks {
    /// Minority-class (`y = +1`) error.
    pub risk_plus: f64,
    /// Majority-class (`y = -1`) error.
    pub risk_minus: f64,
    /// Worst-class error.
    pub wce: f64,
}

impl ClassRisks {
    pub fn from_margins(margin_plus: f64, margin_minus: f64) -> Self {
        let risk_plus = q_function(margin_plus);
        let risk_minus = q_function(margin_minus);
        ClassRisks { risk_plus, risk_minus, wce: risk_plus.max(risk_minus) }
    }
}

pub fn class_risks(alpha: f64, gamma: f64, b: f64, s: f64) -> Result<ClassRisks> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("classifier norm alpha must be positive, got {alpha}")));
    }
    if !(s > 0.0) {
        return Err(Error::domain(format!("signal strength must be positive, got {s}")));
    }
    let signal = gamma * s / alpha;
    let offset = b / alpha;
    Ok(ClassRisks::from_margins(signal + offset, signal - offset))
}
