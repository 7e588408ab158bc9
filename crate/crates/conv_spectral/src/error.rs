use hypercube_core::HypercubeError;
use inner_kernel::KernelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid architecture: {0}")]
    Arch(String),
    #[error("kernel patch size {kernel} does not match architecture q={arch}")]
    KernelQ { kernel: usize, arch: usize },
    #[error("signal dimension {got} does not match d={d}")]
    SignalDim { got: usize, d: usize },
    #[error("non-finite Gram entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("brute force limited to d <= {max}, got d={d}")]
    TooLarge { d: usize, max: usize },
    #[error("mode basis too large ({0} modes); use monte-carlo")]
    ModeBasisTooLarge(usize),
    #[error("matrix is not block-circulant with period {0}")]
    NotBlockCirculant(usize),
    #[error("downsampling invariance requires delta = omega (got delta={delta}, omega={omega})")]
    DownsampleScope { delta: usize, omega: usize },
    #[error("eigendecomposition failed: {0}")]
    Eigen(String),
    #[error(transparent)]
    Hypercube(#[from] HypercubeError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
