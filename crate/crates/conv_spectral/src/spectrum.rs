use std::collections::{BTreeSet, HashMap};

use hypercube_core::{binomial, class_representatives, parity_bits, parity_eval, BinarySignal, IndexSet};
use inner_kernel::InnerProductKernel;
use serde::Serialize;

use crate::arch::{ConvArchitecture, Pooling};
use crate::pooling::{block_circulant_eig, pooling_matrix, CirculantEigenpair};
use crate::SpectralError;

/// Upper bound on the number of stored modes.
pub const MAX_MODES: usize = 2_000_000;

/// Label of a mode inside its class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Frequency {
    Constant,
    /// A single parity `Y_{shift + rep}`.
    Parity {
        shift: usize,
    },
    /// Block frequency `j` (cyclic frequency when `delta = 1`), eigen index within the
    /// block, and whether this is the sine half of the `(j, m - j)` pair.
    Fourier {
        j: usize,
        index: usize,
        sin: bool,
    },
    /// Normalized sum over the whole class.
    Orbit,
    /// Numerically obtained mode without a closed-form label.
    Numeric(usize),
}

impl Frequency {
    fn key(&self) -> (u8, usize, usize, usize) {
        match *self {
            Frequency::Constant => (0, 0, 0, 0),
            Frequency::Parity { shift } => (1, shift, 0, 0),
            Frequency::Fourier { j, index, sin } => (2, j, index, sin as usize),
            Frequency::Orbit => (3, 0, 0, 0),
            Frequency::Numeric(i) => (4, i, 0, 0),
        }
    }

    fn group(&self) -> (u8, usize, usize) {
        match *self {
            Frequency::Parity { .. } => (1, 0, 0),
            Frequency::Fourier { j, index, .. } => (2, j, index),
            other => {
                let k = other.key();
                (k.0, k.1, k.2)
            }
        }
    }
}

/// Translates of one index set: the invariant subspace a group of modes lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeClass {
    pub rep: IndexSet,
    pub degree: usize,
    /// Cyclic diameter of `rep` (0 for the empty set).
    pub diameter: usize,
    pub members: Vec<IndexSet>,
    masks: Option<Vec<u64>>,
}

impl ModeClass {
    pub fn new(rep: IndexSet, diameter: usize, members: Vec<IndexSet>) -> Self {
        let masks = members.iter().map(|m| m.mask()).collect::<Option<Vec<u64>>>();
        Self { degree: rep.len(), rep, diameter, members, masks }
    }

    /// `Y_T(x)` for every member `T`.
    pub fn parities(&self, x: &BinarySignal) -> Vec<f64> {
        match (&self.masks, x.neg_mask()) {
            (Some(masks), Some(neg)) => masks.iter().map(|&m| parity_bits(m, neg)).collect(),
            _ => self.members.iter().map(|m| parity_eval(m, x).expect("dimension checked")).collect(),
        }
    }
}

/// Coordinates of a mode in the parity basis of its class.
#[derive(Clone, Debug, PartialEq)]
pub enum ModeVector {
    Unit(usize),
    Dense(Vec<f64>),
}

impl ModeVector {
    pub fn dot(&self, coords: &[f64]) -> f64 {
        match self {
            ModeVector::Unit(k) => coords[*k],
            ModeVector::Dense(v) => v.iter().zip(coords).map(|(a, b)| a * b).sum(),
        }
    }

    /// `(member position, coefficient)` pairs.
    pub fn entries(&self) -> Vec<(usize, f64)> {
        match self {
            ModeVector::Unit(k) => vec![(*k, 1.0)],
            ModeVector::Dense(v) => v.iter().copied().enumerate().filter(|(_, c)| *c != 0.0).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mode {
    pub lambda: f64,
    pub degree: usize,
    pub class: usize,
    pub freq: Frequency,
    pub vector: ModeVector,
}

/// One exported line: modes sharing eigenvalue, class and frequency are merged.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumRecord {
    pub lambda: f64,
    pub degree: usize,
    /// 1-based class representative.
    pub class: Vec<usize>,
    pub freq: serde_json::Value,
    pub multiplicity: usize,
}

/// Nonzero eigenpairs of a kernel operator on `L^2({-1,+1}^d)`, sorted by eigenvalue
/// (descending), then degree, class representative and frequency.
#[derive(Clone, Debug)]
pub struct KernelSpectrum {
    pub d: usize,
    pub label: String,
    pub classes: Vec<ModeClass>,
    pub modes: Vec<Mode>,
    /// `E_x H(x, x)`, computed independently of the modes.
    pub total_trace: f64,
    /// Block count of the frequency index, used to label exports.
    pub blocks: usize,
}

impl KernelSpectrum {
    pub fn new(d: usize, label: String, classes: Vec<ModeClass>, mut modes: Vec<Mode>, total_trace: f64, blocks: usize) -> Self {
        modes.sort_by(|a, b| {
            b.lambda
                .total_cmp(&a.lambda)
                .then(a.degree.cmp(&b.degree))
                .then_with(|| classes[a.class].rep.cmp(&classes[b.class].rep))
                .then(a.class.cmp(&b.class))
                .then(a.freq.key().cmp(&b.freq.key()))
        });
        Self { d, label, classes, modes, total_trace, blocks }
    }

    pub fn eigenvalue_sum(&self) -> f64 {
        self.modes.iter().map(|m| m.lambda).sum()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    pub fn mode_value(&self, mode: &Mode, x: &BinarySignal) -> f64 {
        mode.vector.dot(&self.classes[mode.class].parities(x))
    }

    /// `sum_m lambda_m psi_m(x) psi_m(y)`.
    pub fn mercer_eval(&self, x: &BinarySignal, y: &BinarySignal) -> f64 {
        let px: Vec<Vec<f64>> = self.classes.iter().map(|c| c.parities(x)).collect();
        let py: Vec<Vec<f64>> = self.classes.iter().map(|c| c.parities(y)).collect();
        self.modes.iter().map(|m| m.lambda * m.vector.dot(&px[m.class]) * m.vector.dot(&py[m.class])).sum()
    }

    /// Position `(class, member)` of every parity spanned by some class.
    pub fn member_index(&self) -> HashMap<IndexSet, (usize, usize)> {
        let mut out = HashMap::new();
        for (c, class) in self.classes.iter().enumerate() {
            for (i, m) in class.members.iter().enumerate() {
                out.insert(m.clone(), (c, i));
            }
        }
        out
    }

    /// Export records, merging runs of modes that differ only by shift or by cos/sin half.
    pub fn records(&self) -> Vec<SpectrumRecord> {
        let mut out: Vec<SpectrumRecord> = Vec::new();
        let mut last: Option<(usize, (u8, usize, usize), f64)> = None;
        for m in &self.modes {
            let key = (m.class, m.freq.group(), m.lambda);
            if last == Some(key) {
                out.last_mut().expect("record exists").multiplicity += 1;
                continue;
            }
            last = Some(key);
            let freq = match m.freq {
                Frequency::Constant => serde_json::json!("constant"),
                Frequency::Parity { .. } => serde_json::json!("parity"),
                Frequency::Fourier { j, .. } => serde_json::json!(if j == 0 { self.blocks } else { j }),
                Frequency::Orbit => serde_json::json!("orbit"),
                Frequency::Numeric(_) => serde_json::json!("numeric"),
            };
            out.push(SpectrumRecord { lambda: m.lambda, degree: m.degree, class: self.classes[m.class].rep.one_based(), freq, multiplicity: 1 });
        }
        out
    }

    /// JSON lines, one record per line.
    pub fn to_jsonl(&self) -> String {
        self.records().iter().map(|r| serde_json::to_string(r).expect("plain data") + "\n").collect()
    }
}

/// Number of `T` of size `l` in `Z_d` fixed by rotation `s`.
fn fixed_sets(d: usize, s: usize, l: usize) -> f64 {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(s % d, d);
    let orbit = d / g;
    if l.is_multiple_of(orbit) {
        binomial(g, l / orbit)
    } else {
        0.0
    }
}

/// `E_x H(x, x)`: a pair of windows contributes `h(1)` when identical and `xi_0`
/// otherwise, except for the rotated full windows of the fully connected families.
fn expected_diagonal(arch: &ConvArchitecture, kernel: &InnerProductKernel) -> f64 {
    let lay = arch.layout();
    let xi = kernel.xi();
    lay.pairs
        .iter()
        .map(|&(a, b, w)| {
            if arch.full_patch() {
                let s = (b + arch.d - a) % arch.d;
                w * (0..=arch.d).map(|l| xi[l] * fixed_sets(arch.d, s, l)).sum::<f64>()
            } else if a == b {
                w * kernel.h_one()
            } else {
                w * xi[0]
            }
        })
        .sum()
}

fn translates(rep: &IndexSet, d: usize) -> Vec<IndexSet> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 0..d {
        let t = rep.translate(k);
        if seen.insert(t.clone()) {
            out.push(t);
        }
    }
    out
}

/// Rotation orbit representatives of `l`-subsets of `Z_d` (lexicographically smallest translate).
fn orbit_representatives(d: usize, l: usize) -> Vec<IndexSet> {
    use itertools::Itertools;
    let mut reps = Vec::new();
    for rest in (1..d).combinations(l - 1) {
        let mut members = vec![0];
        members.extend(rest);
        let minimal = members.iter().all(|&m| {
            let mut t: Vec<usize> = members.iter().map(|&x| (x + d - m) % d).collect();
            t.sort_unstable();
            t >= members
        });
        if minimal {
            reps.push(IndexSet::new(members, d).expect("valid members"));
        }
    }
    reps
}

/// Closed-form spectrum of the kernel operator of `arch` with inner kernel `kernel`.
pub fn spectrum(arch: &ConvArchitecture, kernel: &InnerProductKernel) -> Result<KernelSpectrum, SpectralError> {
    if kernel.q() != arch.q {
        return Err(SpectralError::KernelQ { kernel: kernel.q(), arch: arch.q });
    }
    let (d, q) = (arch.d, arch.q);
    let xi = kernel.xi();
    let lay = arch.layout();
    let floor = 1e-14 * (kernel.h_one().abs() * lay.total_weight().abs()).max(1.0);
    let mut classes = vec![ModeClass::new(IndexSet::empty(d), 0, vec![IndexSet::empty(d)])];
    let mut modes = Vec::new();
    let constant = xi[0] * lay.total_weight();
    if constant > floor {
        modes.push(Mode { lambda: constant, degree: 0, class: 0, freq: Frequency::Constant, vector: ModeVector::Unit(0) });
    }
    let active: Vec<usize> = (1..=q).filter(|&l| xi[l] > floor).collect();
    let mut blocks = d / arch.downsample;

    if arch.full_patch() {
        let global = arch.pooling == Pooling::Global;
        let count: f64 = active.iter().map(|&l| if global { binomial(d - 1, l - 1) } else { binomial(d, l) }).sum();
        if count > MAX_MODES as f64 {
            return Err(SpectralError::ModeBasisTooLarge(count.min(usize::MAX as f64) as usize));
        }
        for &l in &active {
            for rep in orbit_representatives(d, l) {
                let members = translates(&rep, d);
                let p = members.len();
                let c = classes.len();
                let diameter = rep.diameter()?;
                if global {
                    let v = vec![1.0 / (p as f64).sqrt(); p];
                    modes.push(Mode { lambda: xi[l] * d as f64, degree: l, class: c, freq: Frequency::Orbit, vector: ModeVector::Dense(v) });
                } else {
                    for k in 0..p {
                        modes.push(Mode { lambda: xi[l], degree: l, class: c, freq: Frequency::Parity { shift: k }, vector: ModeVector::Unit(k) });
                    }
                }
                classes.push(ModeClass::new(rep, diameter, members));
            }
        }
    } else if let Pooling::NonOverlapping { omega } = arch.pooling {
        let count: f64 = active.iter().map(|&l| binomial(q - 1, l - 1) * (d / omega) as f64).sum();
        if count > MAX_MODES as f64 {
            return Err(SpectralError::ModeBasisTooLarge(count as usize));
        }
        blocks = 1;
        for &l in &active {
            for local in class_representatives(omega, q, l) {
                let gamma = local.members().last().map_or(0, |m| m + 1);
                let lambda = xi[l] * (q + 1 - gamma) as f64;
                for seg in 0..d / omega {
                    let base = seg * omega;
                    let rep = IndexSet::new(local.members().iter().map(|m| base + m).collect(), d)?;
                    let members = (0..omega)
                        .map(|k| IndexSet::new(local.members().iter().map(|m| base + (m + k) % omega).collect(), d))
                        .collect::<Result<Vec<_>, _>>()?;
                    let c = classes.len();
                    modes.push(Mode {
                        lambda,
                        degree: l,
                        class: c,
                        freq: Frequency::Orbit,
                        vector: ModeVector::Dense(vec![1.0 / (omega as f64).sqrt(); omega]),
                    });
                    classes.push(ModeClass::new(rep, gamma, members));
                }
            }
        }
    } else {
        let count: f64 = active.iter().map(|&l| binomial(q - 1, l - 1) * d as f64).sum();
        if count > MAX_MODES as f64 {
            return Err(SpectralError::ModeBasisTooLarge(count as usize));
        }
        // eigenpairs of M^gamma depend on the diameter only
        let mut eig: Vec<Option<Result<Vec<CirculantEigenpair>, Vec<f64>>>> = vec![None; q + 1];
        for &l in &active {
            for rep in class_representatives(d, q, l) {
                let gamma = rep.diameter()?;
                if eig[gamma].is_none() {
                    let m = pooling_matrix(gamma, arch)?;
                    eig[gamma] = Some(if m.is_diagonal() { Err((0..d).map(|i| m.get(i, i)).collect()) } else { Ok(block_circulant_eig(&m)?) });
                }
                let scale = xi[l] * (q + 1 - gamma) as f64 / d as f64;
                let c = classes.len();
                match eig[gamma].as_ref().expect("filled") {
                    Err(diag) => {
                        for (k, &v) in diag.iter().enumerate() {
                            if scale * v > floor {
                                modes.push(Mode {
                                    lambda: scale * v,
                                    degree: l,
                                    class: c,
                                    freq: Frequency::Parity { shift: k },
                                    vector: ModeVector::Unit(k),
                                });
                            }
                        }
                    }
                    Ok(pairs) => {
                        for p in pairs {
                            if scale * p.lambda > floor {
                                modes.push(Mode {
                                    lambda: scale * p.lambda,
                                    degree: l,
                                    class: c,
                                    freq: Frequency::Fourier { j: p.j, index: p.index, sin: p.sin },
                                    vector: ModeVector::Dense(p.vector.clone()),
                                });
                            }
                        }
                    }
                }
                let members = (0..d).map(|k| rep.translate(k)).collect();
                classes.push(ModeClass::new(rep, gamma, members));
            }
        }
    }
    let total_trace = expected_diagonal(arch, kernel);
    Ok(KernelSpectrum::new(d, format!("{arch}, h={}", kernel.source().label()), classes, modes, total_trace, blocks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use inner_kernel::{gegenbauer_coeffs, KernelDescriptor};

    fn k(c: &[f64], q: usize) -> InnerProductKernel {
        gegenbauer_coeffs(&KernelDescriptor::poly(c), q).unwrap()
    }

    #[test]
    fn ck_linear_example() {
        let s = spectrum(&ConvArchitecture::ck(8, 4).unwrap(), &k(&[0.0, 1.0], 4)).unwrap();
        assert_eq!(s.modes.len(), 8);
        assert!(s.modes.iter().all(|m| (m.lambda - 0.125).abs() < 1e-15 && m.degree == 1));
    }

    #[test]
    fn rkhs_dimension_of_ck() {
        let (d, q) = (12, 4);
        let s = spectrum(&ConvArchitecture::ck(d, q).unwrap(), &k(&[0.2, 0.2, 0.2, 0.2, 0.2], q)).unwrap();
        assert_eq!(s.modes.len(), d * (1 << (q - 1)) + 1);
    }

    #[test]
    fn trace_matches_eigenvalue_sum() {
        let h = [0.1, 0.3, 0.2, 0.2, 0.1, 0.1];
        for arch in [
            ConvArchitecture::ck_ap(12, 4, 3).unwrap(),
            ConvArchitecture::ck_ap_ds(12, 4, 3, 3).unwrap(),
            ConvArchitecture::ck_ap_ds(12, 4, 5, 2).unwrap(),
            ConvArchitecture::ck_gp(12, 4).unwrap(),
            ConvArchitecture::non_overlapping(12, 2, 4).unwrap(),
            ConvArchitecture::fc(8),
            ConvArchitecture::fc_gp(8),
        ] {
            let s = spectrum(&arch, &k(&h, arch.q)).unwrap();
            assert!((s.eigenvalue_sum() - s.total_trace).abs() < 1e-10, "{arch}: {} vs {}", s.eigenvalue_sum(), s.total_trace);
        }
    }

    #[test]
    fn records_merge_parities_and_pairs() {
        let s = spectrum(&ConvArchitecture::ck(8, 4).unwrap(), &k(&[0.0, 1.0], 4)).unwrap();
        let r = s.records();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 8);
        let s = spectrum(&ConvArchitecture::ck_ap(8, 3, 2).unwrap(), &k(&[0.0, 1.0], 3)).unwrap();
        assert!(s.records().iter().all(|r| r.multiplicity <= 2));
        assert_eq!(s.records().iter().map(|r| r.multiplicity).sum::<usize>(), s.modes.len());
    }

    #[test]
    fn fc_mode_guard() {
        let wide = k(&[0.1; 13], 40);
        assert!(matches!(spectrum(&ConvArchitecture::fc(40), &wide), Err(SpectralError::ModeBasisTooLarge(_))));
    }
}
