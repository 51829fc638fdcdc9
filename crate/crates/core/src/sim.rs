//! Finite-sample Monte-Carlo counterpart of the asymptotic solvers.
//!
//! Samples follow `x = y mu + z` with `z ~ N(0, I_d)` and `mu = s e_1`, so the
//! fitted `gamma` is simply the first coordinate of `theta`. Test errors are
//! evaluated in closed form from `(alpha, gamma, b)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loss::LossModel;
use crate::risk::{class_risks, ClassRisks};
use crate::solver::ProblemSpec;

/// Condition estimate of the Gram matrix above which the square fit refuses.
pub const MAX_CONDITION: f64 = 1e12;
pub const SQUARE_GRADIENT_TOLERANCE: f64 = 1e-8;
pub const GD_GRADIENT_TOLERANCE: f64 = 1e-6;
pub const GD_MAX_STEPS: usize = 100_000;
/// Parameter norm at which gradient descent gives up.
pub const GD_MAX_NORM: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    features: DMatrix<f64>,
    labels: Vec<f64>,
    mu: DVector<f64>,
    seed: u64,
    label_redraws: u32,
}

impl SampleSet {
    /// Assembles a sample set from explicit parts; labels must be `+1` or `-1`
    /// with both classes present.
    pub fn from_parts(features: DMatrix<f64>, labels: Vec<f64>, mu: DVector<f64>, seed: u64) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::domain(format!("{} feature rows but {} labels", features.nrows(), labels.len())));
        }
        if features.ncols() != mu.len() {
            return Err(Error::domain(format!("{} feature columns but mean of length {}", features.ncols(), mu.len())));
        }
        if labels.len() < 2 {
            return Err(Error::domain("need at least two samples"));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::domain("labels must be +1 or -1"));
        }
        if !labels.contains(&1.0) || !labels.contains(&-1.0) {
            return Err(Error::domain("both classes must be present"));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("features must be finite"));
        }
        Ok(SampleSet { features, labels, mu, seed, label_redraws: 0 })
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn realized_delta(&self) -> f64 {
        self.d() as f64 / self.n() as f64
    }

    /// How many times the label vector was redrawn because a class came out empty.
    pub fn label_redraws(&self) -> u32 {
        self.label_redraws
    }

    pub fn n_plus(&self) -> usize {
        self.labels.iter().filter(|&&y| y > 0.0).count()
    }

    /// Per-sample weights `w_plus` / `w_minus` by class.
    pub fn class_weights(&self, w_plus: f64, w_minus: f64) -> Vec<f64> {
        self.labels.iter().map(|&y| if y > 0.0 { w_plus } else { w_minus }).collect()
    }
}

/// Draws `n` labelled samples at dimension `d = round(delta n)`.
pub fn generate(spec: &ProblemSpec, n: usize, seed: u64) -> Result<SampleSet> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2 samples, got {n}")));
    }
    let d = (spec.delta() * n as f64).round() as usize;
    if d == 0 {
        return Err(Error::domain(format!("delta = {} with n = {n} rounds to zero dimensions", spec.delta())));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let pi_plus = spec.pi_plus();
    let mut label_redraws = 0;
    let labels = loop {
        let labels: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < pi_plus { 1.0 } else { -1.0 }).collect();
        if labels.contains(&1.0) && labels.contains(&-1.0) {
            break labels;
        }
        label_redraws += 1;
    };

    let s = spec.s();
    let mut features = DMatrix::<f64>::zeros(n, d);
    for (i, &y) in labels.iter().enumerate() {
        for j in 0..d {
            let z: f64 = rng.sample(StandardNormal);
            features[(i, j)] = if j == 0 { y * s + z } else { z };
        }
    }
    let mut mu = DVector::zeros(d);
    mu[0] = s;
    Ok(SampleSet { features, labels, mu, seed, label_redraws })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FittedClassifier {
    #[serde(skip)]
    pub theta: DVector<f64>,
    pub bias: f64,
    pub alpha_hat: f64,
    pub gamma_hat: f64,
    /// Weighted empirical risk at the fit.
    pub objective: f64,
    /// Norm of the objective gradient at the fit.
    pub gradient_norm: f64,
    /// Iterations used; zero for the direct solve.
    pub steps: usize,
}

impl FittedClassifier {
    fn new(
        theta: DVector<f64>,
        bias: f64,
        mu: &DVector<f64>,
        objective: f64,
        gradient_norm: f64,
        steps: usize,
    ) -> Self {
        let alpha_hat = theta.norm();
        let gamma_hat = mu.dot(&theta) / mu.norm();
        FittedClassifier { theta, bias, alpha_hat, gamma_hat, objective, gradient_norm, steps }
    }
}

/// `(1/n) sum_i w_i l(y_i (x_i^T theta + b))`.
pub fn weighted_objective(data: &SampleSet, weights: &[f64], loss: &LossModel, theta: &DVector<f64>, bias: f64) -> f64 {
    let scores = data.features() * theta;
    let n = data.n() as f64;
    scores.iter().zip(data.labels()).zip(weights).map(|((&sc, &y), &w)| w * loss.evaluate(y * (sc + bias))).sum::<f64>()
        / n
}

/// Gradient in `(theta, b)` of [`weighted_objective`], stacked as a `d + 1` vector.
fn objective_gradient(data: &SampleSet, weights: &[f64], loss: &LossModel, beta: &DVector<f64>) -> DVector<f64> {
    let d = data.d();
    let theta = beta.rows(0, d);
    let bias = beta[d];
    let scores = data.features() * theta;
    let n = data.n() as f64;
    let coef = DVector::from_iterator(
        data.n(),
        scores
            .iter()
            .zip(data.labels())
            .zip(weights)
            .map(|((&sc, &y), &w)| w * y * loss.derivative(y * (sc + bias)) / n),
    );
    let mut grad = DVector::zeros(d + 1);
    grad.rows_mut(0, d).copy_from(&data.features().tr_mul(&coef));
    grad[d] = coef.sum();
    grad
}

fn check_weights(data: &SampleSet, weights: &[f64]) -> Result<()> {
    if weights.len() != data.n() {
        return Err(Error::domain(format!("{} weights for {} samples", weights.len(), data.n())));
    }
    if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
        return Err(Error::domain("sample weights must be positive and finite"));
    }
    Ok(())
}

/// Exact square-loss fit with minority weight `rho` and majority weight 1.
pub fn fit_weighted_square(data: &SampleSet, rho: f64) -> Result<FittedClassifier> {
    fit_square_with_weights(data, &data.class_weights(rho, 1.0))
}

/// Exact square-loss fit with arbitrary positive per-sample weights, via the
/// normal equations of the augmented design `[X, 1]`.
pub fn fit_square_with_weights(data: &SampleSet, weights: &[f64]) -> Result<FittedClassifier> {
    check_weights(data, weights)?;
    let (n, d) = (data.n(), data.d());
    let mut design = DMatrix::<f64>::zeros(n, d + 1);
    design.columns_mut(0, d).copy_from(data.features());
    design.column_mut(d).fill(1.0);
    let mut weighted = design.clone();
    for (i, &w) in weights.iter().enumerate() {
        weighted.row_mut(i).scale_mut(w / n as f64);
    }
    // y_i^2 = 1, so (y_i a_i^T beta - 1)^2 = (a_i^T beta - y_i)^2
    let y = DVector::from_column_slice(data.labels());
    // explicit transpose: the plain product goes through the blocked gemm kernel
    let gram = weighted.transpose() * &design;
    let rhs = weighted.tr_mul(&y);

    let chol = gram.clone().cholesky().ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
    let diag = chol.l_dirty().diagonal();
    let (lo, hi) = diag.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &v| (lo.min(v.abs()), hi.max(v.abs())));
    let condition = (hi / lo).powi(2);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let mut beta = chol.solve(&rhs);
    let mut grad = &gram * &beta - &rhs;
    if grad.norm() >= SQUARE_GRADIENT_TOLERANCE {
        // one step of iterative refinement
        beta -= chol.solve(&grad);
        grad = &gram * &beta - &rhs;
    }
    let gradient_norm = grad.norm();
    if gradient_norm >= SQUARE_GRADIENT_TOLERANCE {
        return Err(Error::numeric("weighted normal equations", gradient_norm));
    }
    let theta = beta.rows(0, d).into_owned();
    let bias = beta[d];
    let objective = weighted_objective(data, weights, &LossModel::Square, &theta, bias);
    Ok(FittedClassifier::new(theta, bias, data.mu(), objective, gradient_norm, 0))
}

/// Full-batch gradient descent with Armijo backtracking. Trial steps come from
/// the Barzilai-Borwein formula.
pub fn fit_weighted_general(data: &SampleSet, rho: f64, loss: &LossModel) -> Result<FittedClassifier> {
    fit_general_with_weights(data, &data.class_weights(rho, 1.0), loss, GD_MAX_STEPS)
}

pub fn fit_general_with_weights(
    data: &SampleSet,
    weights: &[f64],
    loss: &LossModel,
    max_steps: usize,
) -> Result<FittedClassifier> {
    check_weights(data, weights)?;
    let d = data.d();
    let objective =
        |beta: &DVector<f64>| weighted_objective(data, weights, loss, &beta.rows(0, d).into_owned(), beta[d]);

    let mut beta = DVector::<f64>::zeros(d + 1);
    let mut f = objective(&beta);
    let mut grad = objective_gradient(data, weights, loss, &beta);
    let mut step = 1.0;
    let mut steps = 0;
    while grad.norm() >= GD_GRADIENT_TOLERANCE {
        if steps >= max_steps || beta.norm() > GD_MAX_NORM {
            return Err(Error::FitNotConverged { steps, grad_norm: grad.norm(), param_norm: beta.norm() });
        }
        let g2 = grad.norm_squared();
        let mut t = step;
        let (next, f_next) = loop {
            let cand = &beta - &grad * t;
            let fc = objective(&cand);
            if fc <= f - 1e-4 * t * g2 {
                break (cand, fc);
            }
            t *= 0.5;
            if t < 1e-20 {
                return Err(Error::FitNotConverged { steps, grad_norm: grad.norm(), param_norm: beta.norm() });
            }
        };
        let next_grad = objective_gradient(data, weights, loss, &next);
        let sk = &next - &beta;
        let yk = &next_grad - &grad;
        let sy = sk.dot(&yk);
        step = if sy > 0.0 { sk.norm_squared() / sy } else { 2.0 * t };
        beta = next;
        f = f_next;
        grad = next_grad;
        steps += 1;
    }

    let theta = beta.rows(0, d).into_owned();
    let bias = beta[d];
    if !loss.is_square() && separates(data, &theta, bias, loss) {
        return Err(Error::FitNotConverged { steps, grad_norm: grad.norm(), param_norm: beta.norm() });
    }
    Ok(FittedClassifier::new(theta, bias, data.mu(), f, grad.norm(), steps))
}

/// A loss that keeps decreasing past every training margin has no finite
/// minimizer once the fit separates the data: scaling the fit up lowers the
/// objective further, so the small gradient is an artifact of the tolerance.
fn separates(data: &SampleSet, theta: &DVector<f64>, bias: f64, loss: &LossModel) -> bool {
    let scores = data.features() * theta;
    let margins: Vec<f64> = scores.iter().zip(data.labels()).map(|(&sc, &y)| y * (sc + bias)).collect();
    let max_margin = margins.iter().fold(0.0_f64, |m, &z| m.max(z));
    margins.iter().all(|&z| z > 0.0) && loss.derivative(2.0 * max_margin + 1.0) < 0.0
}

/// Population per-class test errors of a fitted classifier.
pub fn evaluate(fit: &FittedClassifier, mu: &DVector<f64>) -> Result<ClassRisks> {
    let s = mu.norm();
    let gamma = mu.dot(&fit.theta) / s;
    class_risks(fit.theta.norm(), gamma, fit.bias, s)
}
