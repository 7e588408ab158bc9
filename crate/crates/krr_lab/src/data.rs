use std::collections::BTreeMap;

use hypercube_core::{parity_eval, BinarySignal, IndexSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::KrrError;

/// Stream tags used when splitting a master seed.
pub mod stream {
    pub const DATA: u64 = 1;
    pub const NOISE: u64 = 2;
    pub const TEST: u64 = 3;
}

/// Deterministic generator for `(master, tag, a, b)`. Distinct tuples give independent
/// ChaCha streams, so data can be shared across architectures and targets.
pub fn split_rng(master: u64, tag: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    for (chunk, v) in seed.chunks_exact_mut(8).zip([master, tag, a, b]) {
        chunk.copy_from_slice(&v.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

/// Sparse Fourier expansion `f(x) = sum_S c_S Y_S(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTarget {
    d: usize,
    coeffs: BTreeMap<IndexSet, f64>,
}

impl FourierTarget {
    pub fn zero(d: usize) -> Self {
        Self { d, coeffs: BTreeMap::new() }
    }

    /// Repeated sets accumulate; zero coefficients are dropped.
    pub fn new(d: usize, terms: impl IntoIterator<Item = (IndexSet, f64)>) -> Result<Self, KrrError> {
        let mut coeffs = BTreeMap::new();
        for (s, c) in terms {
            if s.dim() != d {
                return Err(KrrError::Dimension { got: s.dim(), expected: d });
            }
            *coeffs.entry(s).or_insert(0.0) += c;
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(Self { d, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &BTreeMap<IndexSet, f64> {
        &self.coeffs
    }

    pub fn coeff(&self, s: &IndexSet) -> f64 {
        self.coeffs.get(s).copied().unwrap_or(0.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c * c).sum()
    }

    pub fn eval(&self, x: &BinarySignal) -> Result<f64, KrrError> {
        if x.dim() != self.d {
            return Err(KrrError::Dimension { got: x.dim(), expected: self.d });
        }
        let mut acc = 0.0;
        for (s, c) in &self.coeffs {
            acc += c * parity_eval(s, x)?;
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub xs: Vec<BinarySignal>,
    pub ys: Vec<f64>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Dataset {
    pub fn new(xs: Vec<BinarySignal>, ys: Vec<f64>) -> Result<Self, KrrError> {
        if xs.is_empty() {
            return Err(KrrError::Empty);
        }
        if xs.len() != ys.len() {
            return Err(KrrError::LengthMismatch { inputs: xs.len(), labels: ys.len() });
        }
        let d = xs[0].dim();
        if let Some(x) = xs.iter().find(|x| x.dim() != d) {
            return Err(KrrError::Dimension { got: x.dim(), expected: d });
        }
        Ok(Self { xs, ys, noise_sigma: 0.0, seed: 0 })
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.xs[0].dim()
    }

    /// Uniform inputs from stream `(DATA, index, n)` and Gaussian label noise from
    /// stream `(NOISE, index, n)` of `master`.
    pub fn sample(target: &FourierTarget, n: usize, noise_sigma: f64, master: u64, index: u64) -> Result<Self, KrrError> {
        let xs = sample_inputs(target.dim(), n, &mut split_rng(master, stream::DATA, index, n as u64));
        let mut noise_rng = split_rng(master, stream::NOISE, index, n as u64);
        let ys = label(target, &xs, noise_sigma, &mut noise_rng)?;
        let mut data = Self::new(xs, ys)?;
        data.noise_sigma = noise_sigma;
        data.seed = master;
        Ok(data)
    }
}

pub fn sample_inputs<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Vec<BinarySignal> {
    (0..n).map(|_| BinarySignal::random(d, rng)).collect()
}

/// `f(x_i) + eps_i` with `eps_i ~ N(0, sigma^2)`.
pub fn label<R: Rng + ?Sized>(target: &FourierTarget, xs: &[BinarySignal], sigma: f64, rng: &mut R) -> Result<Vec<f64>, KrrError> {
    if !(sigma.is_finite() && sigma >= 0.0) {
        return Err(KrrError::BadNoise(sigma));
    }
    let noise = Normal::new(0.0, sigma).map_err(|_| KrrError::BadNoise(sigma))?;
    xs.iter()
        .map(|x| {
            let clean = target.eval(x)?;
            Ok(if sigma > 0.0 { clean + noise.sample(rng) } else { clean })
        })
        .collect()
}
