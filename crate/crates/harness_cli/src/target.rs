use std::fmt;

use hypercube_core::{enumerate_local_sets, IndexSet};
use krr_lab::{split_rng, FourierTarget};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// One Fourier term with a 1-based index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierTerm {
    pub set: Vec<usize>,
    pub coeff: f64,
}

/// Target function families. TOML form: `{ kind = "lf_chain", l = 3 }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    /// `d^{-1/2} sum_i x_i x_{i+1} ... x_{i+l-1}`.
    LfChain {
        l: usize,
    },
    /// `d^{-1/2} sum_i (-1)^i x_i x_{i+1} ... x_{i+l-1}` with 1-based `i`.
    HfChain {
        l: usize,
    },
    Fourier {
        terms: Vec<FourierTerm>,
    },
    /// Unit-norm combination of all degree-`degree` sets of diameter at most `q`, with
    /// standard Gaussian weights drawn from `seed`.
    RandomLocal {
        q: usize,
        degree: usize,
        seed: u64,
    },
}

impl fmt::Display for TargetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::LfChain { l } => write!(f, "lf_chain({l})"),
            Self::HfChain { l } => write!(f, "hf_chain({l})"),
            Self::Fourier { terms } => write!(f, "fourier({} terms)", terms.len()),
            Self::RandomLocal { q, degree, seed } => write!(f, "random_local(q={q},degree={degree},seed={seed})"),
        }
    }
}

fn chain(d: usize, l: usize, sign: impl Fn(usize) -> f64) -> Result<FourierTarget, HarnessError> {
    if l == 0 || l > d {
        return Err(HarnessError::Config(format!("chain length {l} must lie in 1..={d}")));
    }
    let c = 1.0 / (d as f64).sqrt();
    let mut terms = Vec::with_capacity(d);
    for i in 0..d {
        let set = IndexSet::new((0..l).map(|t| (i + t) % d).collect(), d)?;
        terms.push((set, sign(i + 1) * c));
    }
    let f = FourierTarget::new(d, terms)?;
    if f.coeffs().len() != d {
        return Err(HarnessError::Config(format!("chain length {l} repeats sets for d={d}")));
    }
    Ok(f)
}

pub fn build_target(spec: &TargetSpec, d: usize) -> Result<FourierTarget, HarnessError> {
    match spec {
        TargetSpec::LfChain { l } => chain(d, *l, |_| 1.0),
        TargetSpec::HfChain { l } => {
            if d % 2 == 1 {
                return Err(HarnessError::Config(format!(
                    "hf_chain needs even d: with d={d} the sign (-1)^i of the term starting at i=d repeats the sign of i=1 after wrapping"
                )));
            }
            chain(d, *l, |i| if i % 2 == 0 { 1.0 } else { -1.0 })
        }
        TargetSpec::Fourier { terms } => {
            let mut out = Vec::with_capacity(terms.len());
            for t in terms {
                out.push((IndexSet::from_one_based(&t.set, d)?, t.coeff));
            }
            Ok(FourierTarget::new(d, out)?)
        }
        TargetSpec::RandomLocal { q, degree, seed } => {
            let fam = enumerate_local_sets(d, *q, *degree)?;
            if fam.sets.is_empty() {
                return Err(HarnessError::Config(format!("no sets of degree {degree} and diameter <= {q} in d={d}")));
            }
            let mut rng = split_rng(*seed, 0, d as u64, (*q as u64) << 32 | *degree as u64);
            let raw: Vec<f64> = fam.sets.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
            Ok(FourierTarget::new(d, fam.sets.into_iter().zip(raw).map(|(s, c)| (s.set, c / norm)))?)
        }
    }
}
