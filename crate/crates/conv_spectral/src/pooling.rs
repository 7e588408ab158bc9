use std::f64::consts::PI;
use std::fmt::Write as _;

use faer::{c64, Mat};

use crate::arch::{ConvArchitecture, Pooling};
use crate::linalg::{herm_eigen, sym_eigen};
use crate::SpectralError;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Mixing matrix `M^r` among the `d` translates of a diameter-`r` index set, for an
/// architecture with cyclic windows. For average, global and no pooling the entries are
/// integer counts times the rational prefactor `delta / (omega (q + 1 - r))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolingMatrix {
    pub d: usize,
    pub q: usize,
    pub r: usize,
    pub omega: usize,
    pub delta: usize,
    /// Counts of `(c, u, u', t)` quadruples per entry, when the family has them.
    pub counts: Option<Vec<u64>>,
    /// `(numerator, denominator)` in lowest terms, paired with `counts`.
    pub prefactor: Option<(u64, u64)>,
    values: Vec<f64>,
}

impl PoolingMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    /// Row-major `d * d` entries.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry as a reduced fraction, for counted families.
    pub fn rational(&self, i: usize, j: usize) -> Option<(u64, u64)> {
        let (num, den) = self.prefactor?;
        let n = num * self.counts.as_ref()?[i * self.d + j];
        let g = gcd(n, den).max(1);
        Some((n / g, den / g))
    }

    /// `Tr(M) / d`.
    pub fn normalized_trace(&self) -> f64 {
        (0..self.d).map(|i| self.get(i, i)).sum::<f64>() / self.d as f64
    }

    pub fn to_mat(&self) -> Mat<f64> {
        Mat::from_fn(self.d, self.d, |i, j| self.get(i, j))
    }

    /// Dense CSV, one matrix row per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for i in 0..self.d {
            let row: Vec<String> = (0..self.d).map(|j| format!("{}", self.get(i, j))).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.d).all(|i| (0..self.d).all(|j| i == j || self.get(i, j) == 0.0))
    }
}

/// `M^r` for `1 <= r <= q`; see [`PoolingMatrix`].
pub fn pooling_matrix(r: usize, arch: &ConvArchitecture) -> Result<PoolingMatrix, SpectralError> {
    let (d, q, delta) = (arch.d, arch.q, arch.downsample);
    if r == 0 || r > q {
        return Err(SpectralError::Arch(format!("diameter r={r} outside 1..={q}")));
    }
    if arch.full_patch() {
        return Err(SpectralError::Arch("pooling matrices need q <= d/2".into()));
    }
    if d % delta != 0 {
        return Err(SpectralError::Arch(format!("downsample {delta} must divide d={d}")));
    }
    let span = q + 1 - r;
    match &arch.pooling {
        Pooling::NonOverlapping { .. } => Err(SpectralError::Arch("non-overlapping pooling has no translate mixing matrix".into())),
        Pooling::Weighted { .. } => {
            let lay = arch.layout();
            let mut values = vec![0.0; d * d];
            for &(a, b, w) in &lay.pairs {
                for t in 0..span {
                    values[((a + t) % d) * d + (b + t) % d] += w;
                }
            }
            let scale = d as f64 / span as f64;
            values.iter_mut().for_each(|v| *v *= scale);
            Ok(PoolingMatrix { d, q, r, omega: d, delta, counts: None, prefactor: None, values })
        }
        _ => {
            let omega = arch.omega();
            let mut counts = vec![0u64; d * d];
            for c in 0..d / delta {
                for u in 0..omega {
                    for v in 0..omega {
                        for t in 0..span {
                            let i = (c * delta + u + t) % d;
                            let j = (c * delta + v + t) % d;
                            counts[i * d + j] += 1;
                        }
                    }
                }
            }
            let (num, den) = (delta as u64, (omega * span) as u64);
            let g = gcd(num, den);
            let pf = num as f64 / den as f64;
            let values = counts.iter().map(|&c| c as f64 * pf).collect();
            Ok(PoolingMatrix { d, q, r, omega, delta, counts: Some(counts), prefactor: Some((num / g, den / g)), values })
        }
    }
}

/// One real eigenpair of a block-circulant matrix. `j` is the block frequency in
/// `0..d/delta`, `index` the position within the `delta x delta` block spectrum and
/// `sin` marks the imaginary half of a complex pair `(j, m - j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CirculantEigenpair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    pub j: usize,
    pub index: usize,
    pub sin: bool,
}

fn check_structure(values: &[f64], d: usize, period: usize) -> Result<(), SpectralError> {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for i in 0..d {
        for j in 0..d {
            let v = values[i * d + j];
            if (v - values[j * d + i]).abs() > 1e-12 * scale || (v - values[((i + period) % d) * d + (j + period) % d]).abs() > 1e-12 * scale {
                return Err(SpectralError::NotBlockCirculant(period));
            }
        }
    }
    Ok(())
}

/// Real orthonormal eigenbasis of a symmetric block-circulant matrix through its
/// `delta x delta` Hermitian blocks `H_j = sum_k rho_j^k B_k`, `rho_j = exp(2 pi i j / m)`.
pub fn block_circulant_eig(m: &PoolingMatrix) -> Result<Vec<CirculantEigenpair>, SpectralError> {
    block_circulant_eig_raw(m.values(), m.d, m.delta)
}

pub(crate) fn block_circulant_eig_raw(values: &[f64], d: usize, period: usize) -> Result<Vec<CirculantEigenpair>, SpectralError> {
    if period == 0 || !d.is_multiple_of(period) {
        return Err(SpectralError::NotBlockCirculant(period));
    }
    check_structure(values, d, period)?;
    let blocks = d / period;
    let b = |k: usize, s: usize, t: usize| values[s * d + k * period + t];
    let angle = |j: usize, k: usize| 2.0 * PI * ((j * k) % blocks) as f64 / blocks as f64;
    let norm = 1.0 / (blocks as f64).sqrt();
    let mut out = Vec::with_capacity(d);
    for j in 0..blocks {
        if 2 * j > blocks {
            continue;
        }
        let real = j == 0 || 2 * j == blocks;
        if real {
            let sign = |k: usize| if j == 0 || k.is_multiple_of(2) { 1.0 } else { -1.0 };
            let h = Mat::from_fn(period, period, |s, t| (0..blocks).map(|k| sign(k) * b(k, s, t)).sum::<f64>());
            let (vals, vecs) = sym_eigen(&h)?;
            for (index, &lambda) in vals.iter().enumerate() {
                let vector = (0..d).map(|i| sign(i / period) * vecs[(i % period, index)] * norm).collect();
                out.push(CirculantEigenpair { lambda, vector, j, index, sin: false });
            }
        } else {
            let h = Mat::from_fn(period, period, |s, t| {
                (0..blocks).fold(c64::new(0.0, 0.0), |acc, k| {
                    let a = angle(j, k);
                    acc + c64::new(a.cos(), a.sin()) * b(k, s, t)
                })
            });
            let (vals, vecs) = herm_eigen(&h)?;
            for (index, &lambda) in vals.iter().enumerate() {
                let z: Vec<c64> = (0..d)
                    .map(|i| {
                        let a = angle(j, i / period);
                        c64::new(a.cos(), a.sin()) * vecs[(i % period, index)] * (norm * 2f64.sqrt())
                    })
                    .collect();
                out.push(CirculantEigenpair { lambda, vector: z.iter().map(|c| c.re).collect(), j, index, sin: false });
                out.push(CirculantEigenpair { lambda, vector: z.iter().map(|c| c.im).collect(), j, index, sin: true });
            }
        }
    }
    Ok(out)
}

/// `A = M^r(omega, delta) - M^r(omega, 1)` and the zero-frequency block `H_0 = sum_k B_k` of `A`.
#[derive(Clone, Debug)]
pub struct Downsampling {
    pub d: usize,
    pub delta: usize,
    /// Row-major `d * d`.
    pub a: Vec<f64>,
    /// Row-major `delta * delta`.
    pub h0: Vec<f64>,
}

impl Downsampling {
    pub fn h0_max(&self) -> f64 {
        self.h0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_i |(A 1)_i|`.
    pub fn a_ones_max(&self) -> f64 {
        self.a.chunks(self.d).map(|row| row.iter().sum::<f64>().abs()).fold(0.0, f64::max)
    }

    pub fn a_max(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Perturbation of `M^r` caused by downsampling, for the `delta = omega` case.
pub fn downsample_perturbation(arch: &ConvArchitecture, r: usize) -> Result<Downsampling, SpectralError> {
    let omega = arch.omega();
    let delta = arch.downsample;
    if !matches!(arch.pooling, Pooling::Average { .. } | Pooling::Global | Pooling::None) || delta != omega {
        return Err(SpectralError::DownsampleScope { delta, omega });
    }
    let with = pooling_matrix(r, arch)?;
    let base_arch = ConvArchitecture { downsample: 1, ..arch.clone() };
    let without = pooling_matrix(r, &base_arch)?;
    let d = arch.d;
    let a: Vec<f64> = with.values().iter().zip(without.values()).map(|(x, y)| x - y).collect();
    let mut h0 = vec![0.0; delta * delta];
    for s in 0..delta {
        for k in 0..d / delta {
            for t in 0..delta {
                h0[s * delta + t] += a[s * d + k * delta + t];
            }
        }
    }
    Ok(Downsampling { d, delta, a, h0 })
}
