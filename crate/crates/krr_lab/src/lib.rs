//! Kernel ridge regression with convolutional kernels on the hypercube.
//!
//! Fits are `fhat(x) = sum_i alpha_i H(x, x_i)` with `(G + lambda I) alpha = y`, or the
//! minimum-norm interpolant at `lambda = 0`. Test risk is computed exactly from the
//! kernel's eigenmodes or estimated on fresh uniform points.

mod data;
mod error;
mod model;
mod risk;
mod shrink;

pub use data::{label, sample_inputs, split_rng, stream, Dataset, FourierTarget};
pub use error::KrrError;
pub use model::{krr_fit, KrrModel, KrrSolver, ModelDump, DEFAULT_RIDGE, PINV_CUTOFF};
pub use risk::{exact_risk, monte_carlo_risk, predictor_coefficients, predictor_norm_sq, test_risk, write_risk_csv, RiskEstimate, RiskMode, RiskRow};
pub use shrink::{
    effective_dimension, effective_dimension_of, effective_ridge, pooled_effective_dim, shrinkage_predict, ShrinkagePrediction, ShrunkMode,
    KAPPA_ZERO_TOL,
};
