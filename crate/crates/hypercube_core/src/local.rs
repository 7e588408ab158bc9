use itertools::Itertools;

use crate::{HypercubeError, IndexSet};

/// Binomial coefficient `C(n, k)` as `f64` (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// One member of `E_l`: the set, its diameter and its translation class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSet {
    pub set: IndexSet,
    pub diameter: usize,
    /// Index into [`LocalSetFamily::classes`].
    pub class: usize,
    /// `set = classes[class].translate(shift)`.
    pub shift: usize,
}

/// `E_l = {S : |S| = l, diameter(S) <= q}` with its translation classes `C_l`.
#[derive(Clone, Debug)]
pub struct LocalSetFamily {
    pub d: usize,
    pub q: usize,
    pub degree: usize,
    /// Class representatives: contain position 0 and lie in `{0, ..., q-1}`.
    pub classes: Vec<IndexSet>,
    pub sets: Vec<LocalSet>,
}

impl LocalSetFamily {
    /// `r(S) = q + 1 - diameter(S)`.
    pub fn r(&self, s: &LocalSet) -> usize {
        self.q + 1 - s.diameter
    }
}

/// Representatives of the translation classes of degree-`l` sets inside a
/// window of length `q`: subsets of `{0..q-1}` containing 0, embedded in dimension `d`.
pub fn class_representatives(d: usize, q: usize, l: usize) -> Vec<IndexSet> {
    if l == 0 || l > q || q > d {
        return Vec::new();
    }
    (1..q)
        .combinations(l - 1)
        .map(|rest| {
            let mut m = vec![0];
            m.extend(rest);
            IndexSet::new(m, d).expect("positions below q <= d")
        })
        .collect()
}

/// Splits `S` as `rep + shift` with `rep` starting at 0 and spanning `diameter(S)` positions.
///
/// The window start is the member following the largest cyclic gap; unique when
/// `diameter(S) <= d/2`.
pub fn canonical_translate(s: &IndexSet) -> Result<(IndexSet, usize), HypercubeError> {
    let m = s.members();
    let n = m.len();
    if n == 0 {
        return Err(HypercubeError::EmptyDiameter);
    }
    let d = s.dim();
    let mut best_gap = m[0] + d - m[n - 1];
    let mut start = m[0];
    for w in m.windows(2) {
        if w[1] - w[0] > best_gap {
            best_gap = w[1] - w[0];
            start = w[1];
        }
    }
    Ok((s.translate(d - start), start))
}

/// Enumerates `E_l` for `1 <= l <= q <= d/2`, tagging each set with its class.
pub fn enumerate_local_sets(d: usize, q: usize, l: usize) -> Result<LocalSetFamily, HypercubeError> {
    if q == 0 || 2 * q > d {
        return Err(HypercubeError::PatchOverlap { q, d });
    }
    if l == 0 || l > q {
        return Err(HypercubeError::BadDegree { degree: l, q });
    }
    let classes = class_representatives(d, q, l);
    let mut sets = Vec::with_capacity(classes.len() * d);
    for (ci, rep) in classes.iter().enumerate() {
        let diameter = rep.diameter()?;
        for k in 0..d {
            sets.push(LocalSet { set: rep.translate(k), diameter, class: ci, shift: k });
        }
    }
    Ok(LocalSetFamily { d, q, degree: l, classes, sets })
}
