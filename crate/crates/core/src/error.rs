use std::path::PathBuf;

/// Errors raised by the solvers, the simulator and the I/O front ends.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested configuration has no solution (e.g. `delta >= 2 * pi_plus`
    /// for the equal-error weight).
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// An inner numeric routine (prox minimization, quadrature, linear solve)
    /// failed to reach its tolerance.
    #[error("numeric error in {context}: residual {residual:e}")]
    Numeric { context: String, residual: f64 },

    /// The asymptotic system solver exhausted its budget.
    #[error("solver did not converge after {iterations} iterations: last iterate {last:?}, residuals {residuals:?}")]
    NotConverged {
        iterations: usize,
        /// Last iterate as `[alpha, gamma, lambda, b]`.
        last: [f64; 4],
        residuals: [f64; 4],
    },

    /// An iterative empirical fit stopped before reaching its gradient
    /// tolerance, either out of budget or because the parameters ran off.
    #[error("fit did not converge after {steps} steps: gradient norm {grad_norm:e}, parameter norm {param_norm:e}")]
    FitNotConverged { steps: usize, grad_norm: f64, param_norm: f64 },

    /// A linear system was too ill-conditioned to solve reliably.
    #[error("ill-conditioned system (condition estimate {condition:e}); try a larger sample size")]
    IllConditioned { condition: f64 },

    /// Input data cannot support the requested statistic.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub(crate) fn numeric(context: impl Into<String>, residual: f64) -> Self {
        Error::Numeric { context: context.into(), residual }
    }

    /// True for errors caused by bad inputs rather than numerical failure.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Domain(_) | Error::Config(_) | Error::Io { .. } | Error::Csv(_) | Error::Json(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
