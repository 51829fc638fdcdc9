//! Convex margin losses and their Moreau-envelope calculus.
//!
//! For a loss `l` and scale `lambda > 0` the envelope is
//! `M(x; lambda) = min_v l(v) + (v - x)^2 / (2 lambda)`, attained at the prox point.
//! Everything the asymptotic system needs follows from the prox:
//!
//! - `dM/dx = (x - prox) / lambda = l'(prox)`
//! - `dM/dlambda = -(dM/dx)^2 / 2`
//!
//! The square loss has closed forms for all of them. Other losses solve the
//! one-dimensional prox problem numerically.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Residual tolerance `|v - x + lambda l'(v)|` for the numeric prox.
pub const PROX_TOLERANCE: f64 = 1e-10;
/// Iteration budget for the numeric prox.
pub const PROX_MAX_ITER: usize = 100;
/// Step used for finite-difference derivatives of user-supplied losses.
pub const FD_STEP: f64 = 1e-5;

/// Identifier of a [`LossModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Square,
    Logistic,
    Custom,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Square => "square",
            LossKind::Logistic => "logistic",
            LossKind::Custom => "custom",
        })
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(LossKind::Square),
            "logistic" => Ok(LossKind::Logistic),
            other => Err(Error::Config(format!("unknown loss `{other}` (expected square|logistic)"))),
        }
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A user-supplied convex margin loss. Only `l(z)` is required; derivatives
/// fall back to finite differences.
#[derive(Clone)]
pub struct CustomLoss {
    name: String,
    f: ScalarFn,
    derivatives: Option<(ScalarFn, ScalarFn)>,
}

impl fmt::Debug for CustomLoss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomLoss").field("name", &self.name).finish()
    }
}

/// A convex margin loss `l(z)` with `z = y (x^T theta + b)`.
#[derive(Clone, Debug)]
pub enum LossModel {
    /// `l(z) = (z - 1)^2 / 2`
    Square,
    /// `l(z) = log(1 + exp(-z))`
    Logistic,
    Custom(CustomLoss),
}

impl LossModel {
    /// Wraps a closure as a loss after spot-checking midpoint convexity on a grid.
    pub fn custom<F>(name: impl Into<String>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        let grid: Vec<f64> = (0..=80).map(|i| -10.0 + 0.25 * i as f64).collect();
        for &a in &grid {
            let fa = f(a);
            if !fa.is_finite() {
                return Err(Error::domain(format!("loss `{name}` is not finite at {a}")));
            }
            for &b in grid.iter().filter(|&&b| b > a) {
                let fb = f(b);
                let mid = f(0.5 * (a + b));
                let chord = 0.5 * (fa + fb);
                if mid > chord + 1e-12 * (1.0 + chord.abs()) {
                    return Err(Error::domain(format!("loss `{name}` fails midpoint convexity on [{a}, {b}]")));
                }
            }
        }
        Ok(LossModel::Custom(CustomLoss { name, f: Arc::new(f), derivatives: None }))
    }

    /// Like [`LossModel::custom`], with `l'` and `l''` supplied. The
    /// derivatives are spot-checked against finite differences.
    pub fn custom_smooth<F, D1, D2>(name: impl Into<String>, f: F, d1: D1, d2: D2) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let LossModel::Custom(mut loss) = Self::custom(name, f)? else { unreachable!("custom returns a custom loss") };
        for i in 0..=40 {
            let z = -5.0 + 0.25 * i as f64;
            let h = 1e-4;
            let fd1 = ((loss.f)(z + h) - (loss.f)(z - h)) / (2.0 * h);
            let fd2 = (d1(z + h) - d1(z - h)) / (2.0 * h);
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-5 * (1.0 + b.abs());
            if !close(d1(z), fd1) || !close(d2(z), fd2) {
                return Err(Error::domain(format!(
                    "derivatives of loss `{}` disagree with finite differences at {z}",
                    loss.name
                )));
            }
            if d2(z) < 0.0 {
                return Err(Error::domain(format!("loss `{}` has l'' < 0 at {z}", loss.name)));
            }
        }
        loss.derivatives = Some((Arc::new(d1), Arc::new(d2)));
        Ok(LossModel::Custom(loss))
    }

    pub fn from_kind(kind: LossKind) -> Result<Self> {
        match kind {
            LossKind::Square => Ok(LossModel::Square),
            LossKind::Logistic => Ok(LossModel::Logistic),
            LossKind::Custom => Err(Error::Config("custom losses must be constructed with LossModel::custom".into())),
        }
    }

    pub fn kind(&self) -> LossKind {
        match self {
            LossModel::Square => LossKind::Square,
            LossModel::Logistic => LossKind::Logistic,
            LossModel::Custom(_) => LossKind::Custom,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            LossModel::Square => "square",
            LossModel::Logistic => "logistic",
            LossModel::Custom(c) => &c.name,
        }
    }

    pub fn is_square(&self) -> bool {
        matches!(self, LossModel::Square)
    }

    /// `l(z)`
    pub fn evaluate(&self, z: f64) -> f64 {
        match self {
            LossModel::Square => 0.5 * (z - 1.0) * (z - 1.0),
            LossModel::Logistic => softplus(-z),
            LossModel::Custom(c) => (c.f)(z),
        }
    }

    /// `l'(z)`, analytic where available, central differences otherwise.
    pub fn derivative(&self, z: f64) -> f64 {
        match self {
            LossModel::Square => z - 1.0,
            LossModel::Logistic => -sigmoid(-z),
            LossModel::Custom(c) => match &c.derivatives {
                Some((d1, _)) => d1(z),
                None => {
                    let h = FD_STEP * z.abs().max(1.0);
                    ((c.f)(z + h) - (c.f)(z - h)) / (2.0 * h)
                }
            },
        }
    }

    /// `l''(z)` for losses that provide it analytically.
    pub fn second_derivative(&self, z: f64) -> Option<f64> {
        match self {
            LossModel::Square => Some(1.0),
            LossModel::Logistic => {
                let p = sigmoid(z);
                Some(p * (1.0 - p))
            }
            LossModel::Custom(c) => c.derivatives.as_ref().map(|(_, d2)| d2(z)),
        }
    }

    /// Proximal point `argmin_v l(v) + (v - x)^2 / (2 lambda)`.
    pub fn prox(&self, x: f64, lambda: f64) -> Result<f64> {
        check_lambda(lambda)?;
        match self {
            LossModel::Square => Ok((x + lambda) / (1.0 + lambda)),
            _ => self.numeric_prox(x, lambda),
        }
    }

    /// Safeguarded Newton on `r(v) = v - x + lambda l'(v)`, which is strictly
    /// increasing with slope at least one. Falls back to bisection whenever a
    /// Newton step leaves the current bracket.
    fn numeric_prox(&self, x: f64, lambda: f64) -> Result<f64> {
        let residual = |v: f64| v - x + lambda * self.derivative(v);
        let slope = |v: f64| match self.second_derivative(v) {
            Some(h) => 1.0 + lambda * h,
            None => {
                let h = 1e-4 * v.abs().max(1.0);
                1.0 + lambda * (self.derivative(v + h) - self.derivative(v - h)) / (2.0 * h)
            }
        };

        // Bracket the root by stepping away from x. Since l' is monotone,
        // |prox - x| <= |r(x)|; doubling from a small step keeps the bracket
        // within a factor two of that distance even when l'(x) is huge.
        let r0 = residual(x);
        if r0 == 0.0 {
            return Ok(x);
        }
        let dir = if r0 > 0.0 { -1.0 } else { 1.0 };
        let reach = r0.abs();
        let mut step = (1e-3 * (1.0 + x.abs())).min(reach);
        let (mut lo, mut hi) = (x, x);
        let mut found = false;
        for _ in 0..200 {
            let v = x + dir * step;
            // at full reach the root is bracketed even if rounding hides the sign change
            if residual(v).signum() != r0.signum() || step >= reach {
                if dir < 0.0 {
                    lo = v;
                } else {
                    hi = v;
                }
                found = true;
                break;
            }
            if dir < 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            step = (2.0 * step).min(reach);
        }
        if !found {
            return Err(Error::numeric("prox bracketing", r0));
        }

        // absolute near the origin, relative far out where |x| swamps the
        // loss gradient and the residual cannot drop below a few ulps of x
        let tol = PROX_TOLERANCE * (1.0 + x.abs());
        let mut v = 0.5 * (lo + hi);
        let mut r = residual(v);
        let mut last_width = hi - lo;
        for _ in 0..PROX_MAX_ITER {
            if r.abs() <= tol || hi - lo <= 4.0 * f64::EPSILON * v.abs().max(1.0) {
                // one more Newton step is nearly free and gains several digits
                let polished = v - r / slope(v);
                if polished > lo && polished < hi && residual(polished).abs() <= r.abs() {
                    return Ok(polished);
                }
                return Ok(v);
            }
            if r > 0.0 {
                hi = v;
            } else {
                lo = v;
            }
            // Newton can ping-pong across the kink of a nearly piecewise
            // linear loss; bisect unless the bracket is shrinking fast enough
            let newton = v - r / slope(v);
            let width = hi - lo;
            v = if newton > lo && newton < hi && width < 0.5 * last_width { newton } else { 0.5 * (lo + hi) };
            last_width = width;
            r = residual(v);
        }
        if r.abs() <= tol {
            Ok(v)
        } else {
            Err(Error::numeric(format!("prox minimization at x = {x}, lambda = {lambda}"), r))
        }
    }
}

impl fmt::Display for LossModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Moreau envelope of a loss and its partial derivatives at `(x, lambda)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeValue {
    pub value: f64,
    pub prox: f64,
    /// `dM/dx`
    pub d_x: f64,
    /// `dM/dlambda`
    pub d_lambda: f64,
    /// `d^2M/dx^2`
    pub d_xx: f64,
}

/// Evaluates the Moreau envelope of `loss` at `(x, lambda)`.
pub fn moreau_envelope(loss: &LossModel, x: f64, lambda: f64) -> Result<EnvelopeValue> {
    check_lambda(lambda)?;
    if !x.is_finite() {
        return Err(Error::domain(format!("envelope argument must be finite, got {x}")));
    }
    if loss.is_square() {
        let denom = 1.0 + lambda;
        let dev = x - 1.0;
        return Ok(EnvelopeValue {
            value: 0.5 * dev * dev / denom,
            prox: (x + lambda) / denom,
            d_x: dev / denom,
            d_lambda: -0.5 * dev * dev / (denom * denom),
            d_xx: 1.0 / denom,
        });
    }

    let prox = loss.prox(x, lambda)?;
    // (x - prox) / lambda cancels catastrophically once lambda l'(prox) drops
    // below an ulp of x; l'(prox) is the same quantity at the optimum
    let d_x = loss.derivative(prox);
    // the envelope objective is stationary in prox, so this form shrugs off
    // the prox tolerance to first order
    let value = loss.evaluate(prox) + 0.5 * (prox - x) * (prox - x) / lambda;
    let d_xx = match loss.second_derivative(prox) {
        // implicit differentiation of l'(p) + (p - x)/lambda = 0
        Some(h) => h / (1.0 + lambda * h),
        None => {
            let h = FD_STEP * x.abs().max(1.0);
            let up = (x + h - loss.prox(x + h, lambda)?) / lambda;
            let down = (x - h - loss.prox(x - h, lambda)?) / lambda;
            (up - down) / (2.0 * h)
        }
    };
    Ok(EnvelopeValue { value, prox, d_x, d_lambda: -0.5 * d_x * d_x, d_xx })
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("envelope scale lambda must be positive and finite, got {lambda}")))
    }
}

/// `log(1 + exp(t))` without overflow.
pub(crate) fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}
