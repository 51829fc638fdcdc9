//! Exact asymptotics of class-weighted empirical risk minimization on
//! imbalanced two-Gaussian data with `d/n -> delta` in `(0, 1)`, together with
//! a finite-sample simulator that checks every prediction.

// `!(x > 0.0)` is how NaN gets rejected alongside the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod effdim;
pub mod error;
pub mod expectation;
pub mod loss;
pub mod quadrature;
pub mod risk;
pub mod sim;
pub mod solver;
pub mod sweep;

pub use effdim::{effective_dim, FeatureMatrix, SpectrumReport};
pub use error::{Error, Result};
pub use loss::{moreau_envelope, EnvelopeValue, LossKind, LossModel};
pub use risk::{class_risks, q_function, ClassRisks};
pub use sim::{evaluate, fit_weighted_general, fit_weighted_square, generate, FittedClassifier, SampleSet};
pub use solver::{
    compare_weighted_unweighted, rho_tilde, solve_downsampled, solve_equal_error_square, solve_general, solve_square,
    solve_unweighted_square, AsymptoticSolution, ProblemSpec,
};
pub use sweep::{run, Grid, Mode, SweepConfig, SweepRow, Table};
