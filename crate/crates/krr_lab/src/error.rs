use conv_spectral::SpectralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KrrError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Hypercube(#[from] hypercube_core::HypercubeError),
    #[error("ridge must be finite and >= 0, got {0}")]
    BadRidge(f64),
    #[error("effective dimension needs lambda > 0, got {0}")]
    NonPositiveRidge(f64),
    #[error("decay exponent alpha must exceed 1, got {0}")]
    BadAlpha(f64),
    #[error("dataset is empty")]
    Empty,
    #[error("{inputs} inputs but {labels} labels")]
    LengthMismatch { inputs: usize, labels: usize },
    #[error("noise level must be finite and >= 0, got {0}")]
    BadNoise(f64),
    #[error("inputs {first} and {second} are identical with labels {y_first} and {y_second}; interpolation at lambda = 0 is impossible")]
    ConflictingDuplicates { first: usize, second: usize, y_first: f64, y_second: f64 },
    #[error("signal dimension {got} does not match {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("monte-carlo risk needs at least 2 test points, got {0}")]
    TooFewTestPoints(usize),
    #[error("linear solve failed: {0}")]
    Solve(String),
}
