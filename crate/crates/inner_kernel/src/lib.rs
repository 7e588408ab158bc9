//! Inner-product kernels `h(<u,v>/q)` on `{-1,+1}^q`.
//!
//! A kernel is stored by its values on the `q + 1` admissible inner products and
//! by its Gegenbauer coefficients `xi_{q,l}`, so that
//! `h(m/q) = sum_l xi_l C(q,l) Q_l(m)`.

mod gegenbauer;
mod kernel;
mod ntk;

pub use gegenbauer::{gegenbauer_eval, gegenbauer_table, inner_product_law, multiply_by_t};
pub use kernel::{gegenbauer_coeffs, InnerProductKernel, KernelDescriptor};
pub use ntk::{ntk_from_activation, ntk_monte_carlo, Activation, ActivationKind, ActivationNtk, Quadrature};

use thiserror::Error;

/// Coefficients in `[-PSD_TOL, 0)` are clamped to zero, anything below is rejected.
pub const PSD_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("inner product {m} has wrong parity or magnitude for q={q}")]
    BadInnerProduct { q: usize, m: i64 },
    #[error("degree {l} outside 0..={q}")]
    BadDegree { q: usize, l: usize },
    #[error("patch dimension q must be positive")]
    ZeroQ,
    #[error("kernel not positive semidefinite: xi_{l} = {value:e}")]
    NotPsd { l: usize, value: f64 },
    #[error("non-finite kernel value at t = {t}")]
    NonFinite { t: f64 },
    #[error("table needs {expected} values, got {got}")]
    TableLength { expected: usize, got: usize },
    #[error("activation requires parameters: {0}")]
    BadActivation(String),
    #[error("exact quadrature limited to q <= 24, got {0}")]
    QuadratureTooLarge(usize),
}
