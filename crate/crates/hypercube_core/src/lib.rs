//! Signals on the Boolean hypercube `{-1,+1}^d` and the index-set combinatorics
//! used by one-layer convolutional kernels.
//!
//! Positions are 0-based everywhere in the API. Serialized index sets are
//! 1-based JSON arrays.
//!
//! ```
//! use hypercube_core::{BinarySignal, IndexSet, parity_eval};
//!
//! let x: BinarySignal = "--+-".parse().unwrap();
//! let s = IndexSet::new(vec![0, 1], 4).unwrap();
//! assert_eq!(parity_eval(&s, &x).unwrap(), 1.0);
//! ```

mod error;
mod index_set;
mod local;
mod signal;

pub use error::HypercubeError;
pub use index_set::{pairwise_cyclic_diameter, IndexSet};
pub use local::{binomial, canonical_translate, class_representatives, enumerate_local_sets, LocalSet, LocalSetFamily};
pub use signal::BinarySignal;

/// Parity (Walsh) function `Y_S(x) = prod_{i in S} x_i`, with `Y_{{}} = 1`.
pub fn parity_eval(s: &IndexSet, x: &BinarySignal) -> Result<f64, HypercubeError> {
    if s.dim() != x.dim() {
        return Err(HypercubeError::DimMismatch { left: s.dim(), right: x.dim() });
    }
    let neg = s.members().iter().filter(|&&i| x.get(i) < 0).count();
    Ok(if neg % 2 == 0 { 1.0 } else { -1.0 })
}

/// Sign of `Y_S(x)` from packed masks, bit `i` set meaning `x_i = -1` / `i in S`.
#[inline]
pub fn parity_bits(set_mask: u64, neg_mask: u64) -> f64 {
    if (set_mask & neg_mask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
