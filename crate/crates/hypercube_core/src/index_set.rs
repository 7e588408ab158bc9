use serde::{Serialize, Serializer};

use crate::HypercubeError;

/// A subset `S` of the cyclic positions `{0, ..., d-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    members: Vec<usize>,
    dim: usize,
}

impl IndexSet {
    /// Builds a set from 0-based positions in any order.
    pub fn new(mut members: Vec<usize>, dim: usize) -> Result<Self, HypercubeError> {
        members.sort_unstable();
        for w in members.windows(2) {
            if w[0] == w[1] {
                return Err(HypercubeError::Duplicate(w[0]));
            }
        }
        if let Some(&pos) = members.last() {
            if pos >= dim {
                return Err(HypercubeError::OutOfRange { pos, dim });
            }
        }
        Ok(Self { members, dim })
    }

    /// Builds a set from 1-based positions.
    pub fn from_one_based(members: &[usize], dim: usize) -> Result<Self, HypercubeError> {
        let zero = members.iter().map(|&p| p.checked_sub(1).ok_or(HypercubeError::OutOfRange { pos: 0, dim })).collect::<Result<Vec<_>, _>>()?;
        Self::new(zero, dim)
    }

    pub fn empty(dim: usize) -> Self {
        Self { members: Vec::new(), dim }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.members.iter().map(|p| p + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    /// The translate `k + S` (mod d).
    pub fn translate(&self, k: usize) -> Self {
        let mut members: Vec<usize> = self.members.iter().map(|&i| (i + k) % self.dim).collect();
        members.sort_unstable();
        Self { members, dim: self.dim }
    }

    /// `S △ {i}`.
    pub fn toggle(&self, i: usize) -> Self {
        let mut members = self.members.clone();
        match members.binary_search(&i) {
            Ok(pos) => {
                members.remove(pos);
            }
            Err(pos) => members.insert(pos, i),
        }
        Self { members, dim: self.dim }
    }

    /// Bit mask of the members, when `d <= 64`.
    pub fn mask(&self) -> Option<u64> {
        (self.dim <= 64).then(|| self.members.iter().fold(0u64, |m, &i| m | 1 << i))
    }

    /// Length of the shortest cyclic window of consecutive positions containing `S`.
    ///
    /// Equals `d - g + 1` where `g` is the largest cyclic gap between consecutive
    /// members. `r(S) = q + 1 - diameter` then counts the size-`q` patches that contain `S`.
    pub fn diameter(&self) -> Result<usize, HypercubeError> {
        let n = self.members.len();
        if n == 0 {
            return Err(HypercubeError::EmptyDiameter);
        }
        let m = &self.members;
        let mut gap = m[0] + self.dim - m[n - 1];
        for w in m.windows(2) {
            gap = gap.max(w[1] - w[0]);
        }
        Ok(self.dim - gap + 1)
    }
}

/// Pairwise form `max_{i,j} min(mod(j-i,d)+1, mod(i-j,d)+1)`.
///
/// Agrees with [`IndexSet::diameter`] for `|S| <= 2` and whenever the members fit
/// in a window of length `<= d/2 + 1`; it under-counts sets spread around the cycle,
/// e.g. `{0,3,6}` in `d = 8` gets 4 although the shortest window containing it has length 6.
pub fn pairwise_cyclic_diameter(s: &IndexSet) -> Result<usize, HypercubeError> {
    if s.is_empty() {
        return Err(HypercubeError::EmptyDiameter);
    }
    let d = s.dim();
    let mut best = 1;
    for &i in s.members() {
        for &j in s.members() {
            let a = (j + d - i) % d + 1;
            let b = (i + d - j) % d + 1;
            best = best.max(a.min(b));
        }
    }
    Ok(best)
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.one_based().serialize(serializer)
    }
}
