use serde::Serialize;

use super::{rho_tilde, solve_equal_error_square, solve_general, solve_square, solve_unweighted_square, ProblemSpec};
use crate::error::{Error, Result};
use crate::risk::ClassRisks;

/// Outcome of comparing the equal-error weighted model with the unweighted one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComparisonVerdict {
    /// Largest `s^2` at which weighting still wins; `+inf` when the closed-form
    /// threshold is undefined.
    pub threshold_s_squared: f64,
    /// Decided by comparing the two worst-class errors directly.
    pub weighted_wins: bool,
    /// Decided by `s^2 <= threshold_s_squared`.
    pub threshold_verdict: bool,
    pub wce_weighted: f64,
    pub wce_unweighted: f64,
}

/// Closed-form separation threshold on `s^2` below which the equal-error weight
/// beats unweighted training. `None` when the inner square root is negative.
pub fn separation_threshold(pi_plus: f64, delta: f64) -> Option<f64> {
    let pm = 1.0 - pi_plus;
    let inner = pm * pi_plus * (4.0 * pm * pi_plus - delta) / (1.0 - delta);
    if inner < 0.0 {
        return None;
    }
    Some((1.0 - 2.0 * pi_plus) / (2.0 * (2.0 * pi_plus * pm - inner.sqrt())))
}

pub fn compare_weighted_unweighted(spec: &ProblemSpec) -> Result<ComparisonVerdict> {
    if !spec.loss().is_square() {
        return Err(Error::domain("separation comparison is defined for the square loss"));
    }
    if spec.pi_plus() >= 0.5 {
        return Err(Error::domain(format!(
            "separation comparison needs an imbalanced problem, got pi_plus = {}",
            spec.pi_plus()
        )));
    }
    let s = spec.s();
    let weighted = solve_equal_error_square(spec)?;
    let unweighted = solve_unweighted_square(&spec.with_rho(1.0)?)?.risks(s)?;

    let wce_weighted = weighted.wce;
    let wce_unweighted = unweighted.wce;
    let weighted_wins = wce_weighted <= wce_unweighted;
    let (threshold_s_squared, threshold_verdict) = match separation_threshold(spec.pi_plus(), spec.delta()) {
        Some(t) => (t, s * s <= t),
        None => (f64::INFINITY, weighted_wins),
    };

    let tie = (wce_weighted - wce_unweighted).abs() <= 1e-12 * wce_weighted.max(wce_unweighted);
    if threshold_verdict != weighted_wins && !tie {
        return Err(Error::numeric(
            format!(
                "threshold verdict disagrees with direct comparison at s = {s} (threshold s^2 = {threshold_s_squared})"
            ),
            wce_weighted - wce_unweighted,
        ));
    }
    Ok(ComparisonVerdict { threshold_s_squared, weighted_wins, threshold_verdict, wce_weighted, wce_unweighted })
}

/// Per-class risks along a `rho` grid, checked for the monotonicity that makes
/// the worst-class error quasiconvex in `rho`.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiconvexityReport {
    pub rhos: Vec<f64>,
    pub risks: Vec<ClassRisks>,
    /// Grid indices `i` where `risk_plus[i + 1] > risk_plus[i]`.
    pub plus_increases: Vec<usize>,
    /// Grid indices `i` where `risk_minus[i + 1] < risk_minus[i]`.
    pub minus_decreases: Vec<usize>,
    pub argmin_index: usize,
    pub rho_tilde: Option<f64>,
    /// First index `i` where `risk_plus - risk_minus` changes sign between `i` and `i + 1`.
    pub crossing_index: Option<usize>,
    /// Whether `rho_tilde` lies within one grid step of the WCE argmin.
    pub argmin_near_rho_tilde: Option<bool>,
}

impl QuasiconvexityReport {
    pub fn is_monotone(&self) -> bool {
        self.plus_increases.is_empty() && self.minus_decreases.is_empty()
    }

    pub fn argmin_rho(&self) -> f64 {
        self.rhos[self.argmin_index]
    }
}

const MONOTONE_SLACK: f64 = 1e-14;

pub fn wce_quasiconvexity_check(grid: &[ProblemSpec]) -> Result<QuasiconvexityReport> {
    let first = grid.first().ok_or_else(|| Error::domain("empty rho grid"))?;
    for w in grid.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.s() != b.s() || a.pi_plus() != b.pi_plus() || a.delta() != b.delta() {
            return Err(Error::domain("rho grid must share s, pi_plus and delta"));
        }
        if b.rho() <= a.rho() {
            return Err(Error::domain("rho grid must be strictly increasing"));
        }
    }

    let s = first.s();
    let mut risks = Vec::with_capacity(grid.len());
    for spec in grid {
        let sol = if spec.loss().is_square() { solve_square(spec)? } else { solve_general(spec)? };
        risks.push(sol.risks(s)?);
    }
    let rhos: Vec<f64> = grid.iter().map(ProblemSpec::rho).collect();

    let mut plus_increases = Vec::new();
    let mut minus_decreases = Vec::new();
    let mut crossing_index = None;
    for (i, w) in risks.windows(2).enumerate() {
        if w[1].risk_plus > w[0].risk_plus + MONOTONE_SLACK {
            plus_increases.push(i);
        }
        if w[1].risk_minus < w[0].risk_minus - MONOTONE_SLACK {
            minus_decreases.push(i);
        }
        let before = w[0].risk_plus - w[0].risk_minus;
        let after = w[1].risk_plus - w[1].risk_minus;
        if crossing_index.is_none() && (before == 0.0 || before.signum() != after.signum()) {
            crossing_index = Some(i);
        }
    }
    let argmin_index =
        risks.iter().enumerate().min_by(|a, b| a.1.wce.total_cmp(&b.1.wce)).map(|(i, _)| i).expect("non-empty grid");

    let rho_tilde = rho_tilde(s, first.pi_plus(), first.delta()).ok();
    let argmin_near_rho_tilde = rho_tilde.map(|rt| {
        let lo = rhos[argmin_index.saturating_sub(1)];
        let hi = rhos[(argmin_index + 1).min(rhos.len() - 1)];
        lo <= rt && rt <= hi
    });

    Ok(QuasiconvexityReport {
        rhos,
        risks,
        plus_increases,
        minus_decreases,
        argmin_index,
        rho_tilde,
        crossing_index,
        argmin_near_rho_tilde,
    })
}
