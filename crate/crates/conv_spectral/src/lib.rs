//! One-layer convolutional kernels on `{-1,+1}^d`.
//!
//! Families: fully connected, plain convolution, local average pooling (with
//! optional downsampling), global pooling, filter-weighted pooling and
//! non-overlapping segment pooling. For each family the crate evaluates the
//! kernel, assembles Gram matrices and builds the exact operator spectrum
//! under the uniform measure. A brute-force `2^d` oracle checks the closed forms.

mod arch;
mod error;
mod eval;
pub mod exec;
mod kappa;
pub mod linalg;
mod oracle;
mod pooling;
mod spectrum;

pub use arch::{ConvArchitecture, Filter, PatchLayout, Pooling};
pub use error::SpectralError;
pub use eval::{cross_gram, gram_matrix, kernel_eval, KernelEvaluator, PreparedSignal};
pub use kappa::{filter_weights, kappa_is_zero, kappa_weights, kappa_zero_count};
pub use oracle::{brute_force_spectra, brute_force_spectrum, compare_spectra, dense_operator_eigenvalues, SpectralDistance};
pub use pooling::{block_circulant_eig, downsample_perturbation, pooling_matrix, CirculantEigenpair, Downsampling, PoolingMatrix};
pub use spectrum::{spectrum, Frequency, KernelSpectrum, Mode, ModeClass, ModeVector, SpectrumRecord, MAX_MODES};
