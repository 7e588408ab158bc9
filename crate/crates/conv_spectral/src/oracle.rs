//! Brute-force spectra from the full `2^d x 2^d` kernel matrix.

use std::collections::HashMap;

use faer::Mat;
use hypercube_core::{BinarySignal, IndexSet};
use inner_kernel::InnerProductKernel;

use crate::arch::ConvArchitecture;
use crate::eval::{KernelEvaluator, PreparedSignal};
use crate::exec;
use crate::linalg::{sym_eigen, sym_eigenvalues, sym_operator_norm};
use crate::spectrum::{Frequency, KernelSpectrum, Mode, ModeClass, ModeVector};
use crate::SpectralError;

/// Largest `d` accepted by the brute-force oracle.
pub const MAX_ORACLE_DIM: usize = 14;
/// Largest `d` for [`dense_operator_eigenvalues`].
pub const MAX_DENSE_DIM: usize = 10;

const MATRIX_BUDGET_BYTES: usize = 1 << 31;

fn fwht(v: &mut [f64]) {
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

fn transpose_in_place(buf: &mut [f64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// All `2^d` points, bit `i` of the index set when `x_i = -1`.
fn cube(d: usize) -> Vec<BinarySignal> {
    (0..1u64 << d).map(|b| BinarySignal::from_bits(d, b)).collect()
}

/// `K_i[x][y] = H_i(x, y)` for every kernel, row-major.
fn kernel_matrices(evs: &[KernelEvaluator], pts: &[PreparedSignal]) -> Vec<Vec<f64>> {
    let n = pts.len();
    let tables: Vec<&[f64]> = evs.iter().map(|e| e.table()).collect();
    let pairs = &evs[0].layout().pairs;
    let words = evs[0].words();
    let nk = evs.len();
    // interleave kernels per entry so one popcount pass feeds all of them
    let mut buf = vec![0.0; n * n * nk];
    exec::for_each_chunk(&mut buf, n * nk, |x, row| {
        let mut acc = vec![0.0; nk];
        for y in x..n {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for &(a, b, w) in pairs {
                let k = if words == 1 {
                    (pts[x].window(a)[0] ^ pts[y].window(b)[0]).count_ones()
                } else {
                    pts[x].window(a).iter().zip(pts[y].window(b)).map(|(p, r)| (p ^ r).count_ones()).sum()
                } as usize;
                for (slot, t) in acc.iter_mut().zip(&tables) {
                    *slot += w * t[k];
                }
            }
            row[y * nk..(y + 1) * nk].copy_from_slice(&acc);
        }
    });
    if nk == 1 {
        for x in 0..n {
            for y in x + 1..n {
                buf[y * n + x] = buf[x * n + y];
            }
        }
        return vec![buf];
    }
    let mut out: Vec<Vec<f64>> = (0..nk).map(|_| vec![0.0; n * n]).collect();
    for x in 0..n {
        for y in x..n {
            for (i, m) in out.iter_mut().enumerate() {
                let v = buf[(x * n + y) * nk + i];
                m[x * n + y] = v;
                m[y * n + x] = v;
            }
        }
    }
    out
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Parity-basis operator `M[S][T] = E[Y_S(x) H(x,y) Y_T(y)]` split into connected blocks,
/// each diagonalized densely.
fn spectrum_from_matrix(d: usize, label: String, mut k: Vec<f64>) -> Result<KernelSpectrum, SpectralError> {
    let n = 1usize << d;
    let total_trace = (0..n).map(|i| k[i * n + i]).sum::<f64>() / n as f64;
    exec::for_each_chunk(&mut k, n, |_, row| fwht(row));
    transpose_in_place(&mut k, n);
    exec::for_each_chunk(&mut k, n, |_, row| fwht(row));
    let scale = 1.0 / (n as f64 * n as f64);
    k.iter_mut().for_each(|v| *v *= scale);
    let max = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-10 * max.max(f64::MIN_POSITIVE);
    let mut uf = UnionFind((0..n).collect());
    let mut live = vec![false; n];
    for s in 0..n {
        for t in s..n {
            if k[s * n + t].abs() > tol {
                live[s] = true;
                live[t] = true;
                if s != t {
                    uf.union(s, t);
                }
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for s in (0..n).filter(|&s| live[s]) {
        let root = uf.find(s);
        groups.entry(root).or_default().push(s);
    }
    let mut roots: Vec<usize> = groups.keys().copied().collect();
    roots.sort_unstable();
    let floor = 1e-11 * max.max(f64::MIN_POSITIVE);
    let mut classes = Vec::new();
    let mut modes = Vec::new();
    for root in roots {
        let idx = &groups[&root];
        let block = Mat::from_fn(idx.len(), idx.len(), |a, b| k[idx[a] * n + idx[b]]);
        let (vals, vecs) = sym_eigen(&block)?;
        let members: Vec<IndexSet> = idx.iter().map(|&s| IndexSet::new((0..d).filter(|i| s >> i & 1 == 1).collect(), d)).collect::<Result<_, _>>()?;
        let rep = members[0].clone();
        let diameter = if rep.is_empty() { 0 } else { rep.diameter()? };
        let c = classes.len();
        for (e, &lambda) in vals.iter().enumerate() {
            if lambda > floor {
                modes.push(Mode {
                    lambda,
                    degree: rep.len(),
                    class: c,
                    freq: Frequency::Numeric(e),
                    vector: ModeVector::Dense((0..idx.len()).map(|a| vecs[(a, e)]).collect()),
                });
            }
        }
        classes.push(ModeClass::new(rep, diameter, members));
    }
    // blocks mix degrees only if the kernel does; report the lowest degree present
    for m in modes.iter_mut() {
        m.degree = classes[m.class].members.iter().map(|s| s.len()).min().unwrap_or(0);
    }
    Ok(KernelSpectrum::new(d, label, classes, modes, total_trace, 1))
}

/// Brute-force spectra of several kernels on one architecture, sharing the patch work.
pub fn brute_force_spectra(arch: &ConvArchitecture, kernels: &[InnerProductKernel]) -> Result<Vec<KernelSpectrum>, SpectralError> {
    let d = arch.d;
    if d > MAX_ORACLE_DIM {
        return Err(SpectralError::TooLarge { d, max: MAX_ORACLE_DIM });
    }
    let evs = kernels.iter().map(|k| KernelEvaluator::new(arch, k)).collect::<Result<Vec<_>, _>>()?;
    if evs.is_empty() {
        return Ok(Vec::new());
    }
    let pts = evs[0].prepare_all(&cube(d))?;
    let per = ((1usize << d) * (1usize << d) * 8).max(1);
    let group = (MATRIX_BUDGET_BYTES / per / 2).max(1);
    let mut out = Vec::with_capacity(kernels.len());
    for (chunk, ks) in evs.chunks(group).zip(kernels.chunks(group)) {
        for (m, k) in kernel_matrices(chunk, &pts).into_iter().zip(ks) {
            out.push(spectrum_from_matrix(d, format!("{arch}, h={} (brute force)", k.source().label()), m)?);
        }
    }
    Ok(out)
}

pub fn brute_force_spectrum(arch: &ConvArchitecture, kernel: &InnerProductKernel) -> Result<KernelSpectrum, SpectralError> {
    Ok(brute_force_spectra(arch, std::slice::from_ref(kernel))?.remove(0))
}

/// Every eigenvalue (descending, zeros included) of the operator matrix `[H(x,y)] / 2^d`
/// in the point basis, without any Fourier step.
pub fn dense_operator_eigenvalues(arch: &ConvArchitecture, kernel: &InnerProductKernel) -> Result<Vec<f64>, SpectralError> {
    let d = arch.d;
    if d > MAX_DENSE_DIM {
        return Err(SpectralError::TooLarge { d, max: MAX_DENSE_DIM });
    }
    let ev = KernelEvaluator::new(arch, kernel)?;
    let pts = ev.prepare_all(&cube(d))?;
    let n = pts.len();
    let m = Mat::from_fn(n, n, |x, y| ev.eval_prepared(&pts[x], &pts[y]) / n as f64);
    let mut vals = sym_eigenvalues(&m)?;
    vals.reverse();
    Ok(vals)
}

/// Distance between two spectra.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDistance {
    /// Max deviation between descending eigenvalue lists padded with zeros.
    pub eigenvalue: f64,
    /// Max operator-norm distance between eigenspace projectors, over eigenvalue clusters.
    /// A cluster whose dimensions differ counts as 1.
    pub projector: f64,
    pub clusters: usize,
}

const CLUSTER_GAP: f64 = 1e-9;
const MAX_CLUSTER_SUPPORT: usize = 6000;

pub fn compare_spectra(a: &KernelSpectrum, b: &KernelSpectrum) -> Result<SpectralDistance, SpectralError> {
    let (la, lb) = (a.lambdas(), b.lambdas());
    let eigenvalue =
        (0..la.len().max(lb.len())).map(|i| (la.get(i).copied().unwrap_or(0.0) - lb.get(i).copied().unwrap_or(0.0)).abs()).fold(0.0, f64::max);

    let mut all: Vec<(f64, usize, usize)> = la.iter().enumerate().map(|(i, &l)| (l, 0, i)).collect();
    all.extend(lb.iter().enumerate().map(|(i, &l)| (l, 1, i)));
    all.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut projector: f64 = 0.0;
    let mut clusters = 0;
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && all[end - 1].0 - all[end].0 <= CLUSTER_GAP {
            end += 1;
        }
        let cluster = &all[start..end];
        start = end;
        if cluster[0].0 < CLUSTER_GAP {
            continue;
        }
        clusters += 1;
        let na = cluster.iter().filter(|c| c.1 == 0).count();
        if 2 * na != cluster.len() {
            projector = projector.max(1.0);
            continue;
        }
        let mut support: HashMap<IndexSet, usize> = HashMap::new();
        let mut sparse: Vec<(usize, Vec<(usize, f64)>)> = Vec::new();
        for &(_, side, i) in cluster {
            let s = if side == 0 { a } else { b };
            let mode = &s.modes[i];
            let members = &s.classes[mode.class].members;
            let coords = mode
                .vector
                .entries()
                .into_iter()
                .map(|(p, c)| {
                    let next = support.len();
                    (*support.entry(members[p].clone()).or_insert(next), c)
                })
                .collect();
            sparse.push((side, coords));
        }
        let n = support.len();
        if n > MAX_CLUSTER_SUPPORT {
            return Err(SpectralError::Eigen(format!("cluster support {n} too large to compare")));
        }
        let mut diff = Mat::<f64>::zeros(n, n);
        for (side, coords) in &sparse {
            let sign = if *side == 0 { 1.0 } else { -1.0 };
            for &(p, x) in coords {
                for &(r, y) in coords {
                    diff[(p, r)] += sign * x * y;
                }
            }
        }
        projector = projector.max(sym_operator_norm(&diff)?);
    }
    Ok(SpectralDistance { eigenvalue, projector, clusters })
}
