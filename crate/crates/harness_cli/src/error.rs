use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Spectral(#[from] conv_spectral::SpectralError),
    #[error(transparent)]
    Krr(#[from] krr_lab::KrrError),
    #[error(transparent)]
    Kernel(#[from] inner_kernel::KernelError),
    #[error(transparent)]
    Hypercube(#[from] hypercube_core::HypercubeError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("resource guard: n={n} needs about {needed_mb} MiB for the Gram system, cap is {cap_mb} MiB")]
    ResourceGuard { n: usize, needed_mb: usize, cap_mb: usize },
    #[error("verification failed: {0}")]
    Verification(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for failed verification, 3 for the resource guard, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Verification(_) => 2,
            Self::ResourceGuard { .. } => 3,
            _ => 1,
        }
    }
}
