use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypercubeError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("signal entry {index} is {value}, expected -1 or +1")]
    NotBinary { index: usize, value: i64 },
    #[error("signal dimension must be positive")]
    EmptySignal,
    #[error("position {pos} out of range for dimension {dim}")]
    OutOfRange { pos: usize, dim: usize },
    #[error("duplicate position {0} in index set")]
    Duplicate(usize),
    #[error("diameter undefined for empty set")]
    EmptyDiameter,
    #[error("patch size {q} invalid for dimension {d}")]
    BadPatch { q: usize, d: usize },
    #[error("patch overlap regime unsupported: q={q} > d/2 with d={d}")]
    PatchOverlap { q: usize, d: usize },
    #[error("degree {degree} outside 1..={q}")]
    BadDegree { degree: usize, q: usize },
    #[error("cannot parse signal: {0}")]
    Parse(String),
}
