use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::HypercubeError;

/// A point `x` of `{-1,+1}^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinarySignal {
    entries: Vec<i8>,
}

impl BinarySignal {
    pub fn new(entries: Vec<i8>) -> Result<Self, HypercubeError> {
        if entries.is_empty() {
            return Err(HypercubeError::EmptySignal);
        }
        if let Some((index, &v)) = entries.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(HypercubeError::NotBinary { index, value: v as i64 });
        }
        Ok(Self { entries })
    }

    pub fn from_i64(entries: &[i64]) -> Result<Self, HypercubeError> {
        if let Some((index, &v)) = entries.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(HypercubeError::NotBinary { index, value: v });
        }
        Self::new(entries.iter().map(|&v| v as i8).collect())
    }

    /// Point whose coordinate `i` is `-1` iff bit `i` of `bits` is set. Requires `d <= 64`.
    pub fn from_bits(d: usize, bits: u64) -> Self {
        assert!((1..=64).contains(&d), "from_bits needs 1 <= d <= 64");
        Self { entries: (0..d).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect() }
    }

    /// Uniform draw from the hypercube.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        assert!(d >= 1);
        Self { entries: (0..d).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect() }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize) -> i8 {
        self.entries[i]
    }

    /// Cyclic shift `t_m x = (x_{m+1}, ..., x_d, x_1, ..., x_m)`.
    pub fn shift(&self, m: usize) -> Self {
        let d = self.dim();
        Self { entries: (0..d).map(|i| self.entries[(i + m) % d]).collect() }
    }

    /// Cyclic window `(x_k, ..., x_{k+q-1})` with 0-based start `k`.
    pub fn patch(&self, k: usize, q: usize) -> Result<Self, HypercubeError> {
        let d = self.dim();
        if q == 0 || q > d {
            return Err(HypercubeError::BadPatch { q, d });
        }
        Ok(Self { entries: (0..q).map(|t| self.entries[(k + t) % d]).collect() })
    }

    pub fn dot(&self, other: &Self) -> Result<i64, HypercubeError> {
        if self.dim() != other.dim() {
            return Err(HypercubeError::DimMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(self.entries.iter().zip(&other.entries).map(|(&a, &b)| (a * b) as i64).sum())
    }

    /// Bit `i` set iff `x_i = -1`, when `d <= 64`.
    pub fn neg_mask(&self) -> Option<u64> {
        (self.dim() <= 64).then(|| self.entries.iter().enumerate().fold(0u64, |m, (i, &v)| if v < 0 { m | 1 << i } else { m }))
    }

    /// Negative-coordinate mask of the patch starting at `k`, bit `t` for `x_{k+t}`. Needs `q <= 64`.
    pub fn patch_mask(&self, k: usize, q: usize) -> u64 {
        debug_assert!(q <= 64 && q <= self.dim());
        let d = self.dim();
        (0..q).fold(0u64, |m, t| if self.entries[(k + t) % d] < 0 { m | 1 << t } else { m })
    }
}

impl fmt::Display for BinarySignal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.entries {
            f.write_str(if v > 0 { "+" } else { "−" })?;
        }
        Ok(())
    }
}

impl FromStr for BinarySignal {
    type Err = HypercubeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let entries = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '−' => Ok(-1),
                other => Err(HypercubeError::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<i8>, _>>()?;
        Self::new(entries)
    }
}

impl Serialize for BinarySignal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SignalRepr {
    Text(String),
    Array(Vec<i64>),
}

impl<'de> Deserialize<'de> for BinarySignal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match SignalRepr::deserialize(deserializer)? {
            SignalRepr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            SignalRepr::Array(v) => Self::from_i64(&v).map_err(serde::de::Error::custom),
        }
    }
}
