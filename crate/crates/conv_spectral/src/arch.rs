use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::SpectralError;

/// Pooling filter over cyclic distances for weighted pooling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Filter {
    /// `tau(x) = exp(-x^2 / (2 sigma^2)) / (sqrt(2 pi) sigma)`.
    Gaussian { sigma: f64 },
    /// `tau` at distances `0..=d/2`.
    Table { values: Vec<f64> },
}

impl Filter {
    /// `tau(dist)`.
    pub fn tau(&self, dist: usize) -> f64 {
        match self {
            Filter::Gaussian { sigma } => {
                let x = dist as f64;
                (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * std::f64::consts::PI).sqrt() * sigma)
            }
            Filter::Table { values } => values.get(dist).copied().unwrap_or(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Pooling {
    None,
    Average {
        omega: usize,
    },
    Weighted {
        filter: Filter,
    },
    Global,
    /// Global pooling inside each of the `d/omega` consecutive segments of length `omega`,
    /// patches wrapping around within their segment.
    NonOverlapping {
        omega: usize,
    },
}

/// `(d, q, pooling, downsample)`. Patches have size `q` with `q <= d/2`, or `q = d`
/// for the fully connected limits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvArchitecture {
    pub d: usize,
    pub q: usize,
    pub pooling: Pooling,
    #[serde(default = "one")]
    pub downsample: usize,
}

fn one() -> usize {
    1
}

impl ConvArchitecture {
    /// Validates and normalizes (`Average{1}` becomes `None`, `Average{d}` becomes `Global`).
    pub fn new(d: usize, q: usize, pooling: Pooling, downsample: usize) -> Result<Self, SpectralError> {
        let bad = |m: String| Err(SpectralError::Arch(m));
        if d == 0 || q == 0 {
            return bad("d and q must be positive".into());
        }
        if !(2 * q <= d || q == d) {
            return bad(format!("need q <= d/2 or q = d, got d={d} q={q}"));
        }
        if downsample == 0 || !d.is_multiple_of(downsample) {
            return bad(format!("downsample {downsample} must divide d={d}"));
        }
        let pooling = match pooling {
            Pooling::Average { omega } if omega == 0 || omega > d => {
                return bad(format!("omega={omega} outside 1..={d}"));
            }
            Pooling::Average { omega: 1 } => Pooling::None,
            Pooling::Average { omega } if omega == d => Pooling::Global,
            p => p,
        };
        match &pooling {
            Pooling::Weighted { filter } => {
                if downsample != 1 || q == d {
                    return bad("weighted pooling supports downsample = 1 and q <= d/2 only".into());
                }
                if let Filter::Gaussian { sigma } = filter {
                    if sigma.is_nan() || *sigma <= 0.0 {
                        return bad("gaussian sigma must be positive".into());
                    }
                }
            }
            Pooling::NonOverlapping { omega } => {
                if *omega == 0 || !d.is_multiple_of(*omega) || 2 * q > *omega || downsample != 1 {
                    return bad(format!("non-overlapping pooling needs omega | d, q <= omega/2, no downsampling (d={d} q={q} omega={omega})"));
                }
            }
            Pooling::Average { .. } if q == d => {
                return bad("full-size patches support no pooling or global pooling only".into());
            }
            _ => {}
        }
        Ok(Self { d, q, pooling, downsample })
    }

    pub fn fc(d: usize) -> Self {
        Self::new(d, d, Pooling::None, 1).expect("valid")
    }

    pub fn fc_gp(d: usize) -> Self {
        Self::new(d, d, Pooling::Global, 1).expect("valid")
    }

    pub fn ck(d: usize, q: usize) -> Result<Self, SpectralError> {
        Self::new(d, q, Pooling::None, 1)
    }

    pub fn ck_ap(d: usize, q: usize, omega: usize) -> Result<Self, SpectralError> {
        Self::new(d, q, Pooling::Average { omega }, 1)
    }

    pub fn ck_gp(d: usize, q: usize) -> Result<Self, SpectralError> {
        Self::new(d, q, Pooling::Global, 1)
    }

    pub fn ck_ap_ds(d: usize, q: usize, omega: usize, delta: usize) -> Result<Self, SpectralError> {
        Self::new(d, q, Pooling::Average { omega }, delta)
    }

    pub fn weighted(d: usize, q: usize, filter: Filter) -> Result<Self, SpectralError> {
        Self::new(d, q, Pooling::Weighted { filter }, 1)
    }

    pub fn non_overlapping(d: usize, q: usize, omega: usize) -> Result<Self, SpectralError> {
        Self::new(d, q, Pooling::NonOverlapping { omega }, 1)
    }

    /// Pooling width: 1 without pooling, `d` for global or weighted pooling.
    pub fn omega(&self) -> usize {
        match &self.pooling {
            Pooling::None => 1,
            Pooling::Average { omega } | Pooling::NonOverlapping { omega } => *omega,
            Pooling::Global | Pooling::Weighted { .. } => self.d,
        }
    }

    /// Patches are the whole signal.
    pub fn full_patch(&self) -> bool {
        self.q == self.d
    }

    /// Filter values `tau(dist(s))` for `s` in `0..d`.
    pub fn filter_row(&self) -> Option<Vec<f64>> {
        match &self.pooling {
            Pooling::Weighted { filter } => Some((0..self.d).map(|s| filter.tau(s.min(self.d - s))).collect()),
            _ => None,
        }
    }

    /// Which patch pairs enter the kernel and with which weight.
    pub fn layout(&self) -> PatchLayout {
        let (d, q) = (self.d, self.q);
        let cyclic = |a: usize| -> Vec<usize> { (0..q).map(|t| (a + t) % d).collect() };
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut windows: Vec<Vec<usize>> = (0..d).map(cyclic).collect();
        match &self.pooling {
            Pooling::None => {
                let delta = self.downsample;
                for c in 0..d / delta {
                    *acc.entry((c * delta, c * delta)).or_default() += delta as f64 / d as f64;
                }
            }
            Pooling::Average { omega } => {
                let (w, delta) = (*omega, self.downsample);
                let unit = delta as f64 / (d * w) as f64;
                for c in 0..d / delta {
                    for u in 0..w {
                        for v in 0..w {
                            *acc.entry(((c * delta + u) % d, (c * delta + v) % d)).or_default() += unit;
                        }
                    }
                }
            }
            Pooling::Global => {
                for a in 0..d {
                    for b in 0..d {
                        acc.insert((a, b), 1.0 / d as f64);
                    }
                }
            }
            Pooling::Weighted { .. } => {
                let tau = self.filter_row().expect("weighted");
                for a in 0..d {
                    for b in 0..d {
                        let w: f64 = (0..d).map(|k| tau[(a + d - k) % d] * tau[(b + d - k) % d]).sum::<f64>() / d as f64;
                        acc.insert((a, b), w);
                    }
                }
            }
            Pooling::NonOverlapping { omega } => {
                let w = *omega;
                windows = (0..d)
                    .map(|a| {
                        let (seg, i) = (a / w, a % w);
                        (0..q).map(|t| seg * w + (i + t) % w).collect()
                    })
                    .collect();
                for seg in 0..d / w {
                    for i in 0..w {
                        for j in 0..w {
                            acc.insert((seg * w + i, seg * w + j), 1.0 / w as f64);
                        }
                    }
                }
            }
        }
        if self.full_patch() {
            // full windows are rotations: <x_(a), y_(b)> only depends on b - a
            let mut folded: BTreeMap<(usize, usize), f64> = BTreeMap::new();
            for ((a, b), w) in acc {
                *folded.entry((0, (b + d - a) % d)).or_default() += w;
            }
            acc = folded;
        }
        PatchLayout { q, windows, pairs: acc.into_iter().filter(|(_, w)| *w != 0.0).map(|((a, b), w)| (a, b, w)).collect() }
    }

    /// Short family label.
    pub fn label(&self) -> String {
        let ds = if self.downsample > 1 { format!(",Δ={}", self.downsample) } else { String::new() };
        match (&self.pooling, self.full_patch()) {
            (Pooling::None, true) => "FC".into(),
            (Pooling::Global, true) => "FC-GP".into(),
            (Pooling::None, false) if self.downsample > 1 => format!("CK(q={}{ds})", self.q),
            (Pooling::None, false) => format!("CK(q={})", self.q),
            (Pooling::Average { omega }, _) => format!("CK-LP(q={},ω={omega}{ds})", self.q),
            (Pooling::Global, false) => format!("CK-GP(q={})", self.q),
            (Pooling::Weighted { filter }, _) => match filter {
                Filter::Gaussian { sigma } => format!("CK-W(q={},σ={sigma})", self.q),
                Filter::Table { .. } => format!("CK-W(q={})", self.q),
            },
            (Pooling::NonOverlapping { omega }, _) => format!("CK-NO(q={},ω={omega})", self.q),
        }
    }
}

impl fmt::Display for ConvArchitecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} d={}", self.label(), self.d)
    }
}

/// `H(x, y) = sum_{(a, b, w) in pairs} w * h(<x_[windows[a]], y_[windows[b]]> / q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchLayout {
    pub q: usize,
    /// Positions of each patch, in order.
    pub windows: Vec<Vec<usize>>,
    pub pairs: Vec<(usize, usize, f64)>,
}

impl PatchLayout {
    /// Sum of all pair weights (the eigenvalue factor of the constant mode).
    pub fn total_weight(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).sum()
    }
}
