use faer::Mat;
use hypercube_core::BinarySignal;
use inner_kernel::InnerProductKernel;

use crate::arch::{ConvArchitecture, PatchLayout};
use crate::exec;
use crate::SpectralError;

/// A signal reduced to one bitmask per patch window (bit `t` set when entry `t` of the
/// window is −1). Windows longer than 64 span several words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreparedSignal {
    words: usize,
    masks: Vec<u64>,
}

impl PreparedSignal {
    pub(crate) fn window(&self, a: usize) -> &[u64] {
        &self.masks[a * self.words..(a + 1) * self.words]
    }
}

/// Evaluates one kernel of one architecture on prepared signals.
#[derive(Clone, Debug)]
pub struct KernelEvaluator {
    d: usize,
    layout: PatchLayout,
    values: Vec<f64>,
    words: usize,
    used_windows: Vec<bool>,
    /// `(a, b)` of every layout pair, with weights in `weights` or `uniform`.
    pair_index: Vec<(u32, u32)>,
    weights: Vec<f64>,
    uniform: Option<f64>,
    #[cfg_attr(not(target_arch = "x86_64"), allow(dead_code))]
    popcnt: bool,
}

impl KernelEvaluator {
    pub fn new(arch: &ConvArchitecture, kernel: &InnerProductKernel) -> Result<Self, SpectralError> {
        if kernel.q() != arch.q {
            return Err(SpectralError::KernelQ { kernel: kernel.q(), arch: arch.q });
        }
        let layout = arch.layout();
        let mut used_windows = vec![false; layout.windows.len()];
        for &(a, b, _) in &layout.pairs {
            used_windows[a] = true;
            used_windows[b] = true;
        }
        let pair_index = layout.pairs.iter().map(|&(a, b, _)| (a as u32, b as u32)).collect();
        let weights: Vec<f64> = layout.pairs.iter().map(|p| p.2).collect();
        let uniform = weights.first().copied().filter(|w| weights.iter().all(|v| v == w));
        Ok(Self {
            d: arch.d,
            words: arch.q.div_ceil(64),
            values: kernel.values().to_vec(),
            layout,
            used_windows,
            pair_index,
            weights,
            uniform,
            popcnt: has_popcnt(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn layout(&self) -> &PatchLayout {
        &self.layout
    }

    pub(crate) fn table(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn words(&self) -> usize {
        self.words
    }

    pub fn prepare(&self, x: &BinarySignal) -> Result<PreparedSignal, SpectralError> {
        if x.dim() != self.d {
            return Err(SpectralError::SignalDim { got: x.dim(), d: self.d });
        }
        let e = x.entries();
        let mut masks = vec![0u64; self.layout.windows.len() * self.words];
        for (a, win) in self.layout.windows.iter().enumerate() {
            if !self.used_windows[a] {
                continue;
            }
            let out = &mut masks[a * self.words..(a + 1) * self.words];
            for (t, &pos) in win.iter().enumerate() {
                if e[pos] < 0 {
                    out[t / 64] |= 1 << (t % 64);
                }
            }
        }
        Ok(PreparedSignal { words: self.words, masks })
    }

    pub fn prepare_all(&self, xs: &[BinarySignal]) -> Result<Vec<PreparedSignal>, SpectralError> {
        exec::map_indexed(xs.len(), |i| self.prepare(&xs[i])).into_iter().collect()
    }

    /// `sum_{(a,b,w)} w * h(1 - 2 * disagreements / q)`.
    pub fn eval_prepared(&self, x: &PreparedSignal, y: &PreparedSignal) -> f64 {
        if self.words == 1 {
            #[cfg(target_arch = "x86_64")]
            if self.popcnt {
                // SAFETY: the CPU reported popcnt support when the evaluator was built.
                return unsafe { self.eval_single_word_popcnt(&x.masks, &y.masks) };
            }
            return self.eval_single_word(&x.masks, &y.masks);
        }
        let mut acc = 0.0;
        for (&(a, b), w) in self.pair_index.iter().zip(&self.weights) {
            let k: u32 = x.window(a as usize).iter().zip(y.window(b as usize)).map(|(p, r)| (p ^ r).count_ones()).sum();
            acc += w * self.values[k as usize];
        }
        acc
    }

    #[inline(always)]
    fn eval_single_word(&self, xm: &[u64], ym: &[u64]) -> f64 {
        let lookup = |a: u32, b: u32| self.values[(xm[a as usize] ^ ym[b as usize]).count_ones() as usize];
        match self.uniform {
            Some(w) => w * self.pair_index.iter().map(|&(a, b)| lookup(a, b)).sum::<f64>(),
            None => self.pair_index.iter().zip(&self.weights).map(|(&(a, b), w)| w * lookup(a, b)).sum(),
        }
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "popcnt")]
    unsafe fn eval_single_word_popcnt(&self, xm: &[u64], ym: &[u64]) -> f64 {
        self.eval_single_word(xm, ym)
    }

    /// Same value as `eval_prepared`, with the arguments put in a canonical order so that
    /// `H(x, y)` and `H(y, x)` round identically.
    pub fn eval_symmetric(&self, x: &PreparedSignal, y: &PreparedSignal) -> f64 {
        if x.masks <= y.masks {
            self.eval_prepared(x, y)
        } else {
            self.eval_prepared(y, x)
        }
    }

    pub fn eval(&self, x: &BinarySignal, y: &BinarySignal) -> Result<f64, SpectralError> {
        Ok(self.eval_symmetric(&self.prepare(x)?, &self.prepare(y)?))
    }

    /// Symmetric Gram matrix of prepared signals.
    pub fn gram_prepared(&self, xs: &[PreparedSignal]) -> Result<Mat<f64>, SpectralError> {
        let n = xs.len();
        let mut buf = vec![0.0; n * n];
        if n == 0 {
            return Ok(Mat::zeros(0, 0));
        }
        exec::for_each_chunk(&mut buf, n, |i, row| {
            for j in i..n {
                row[j] = self.eval_symmetric(&xs[i], &xs[j]);
            }
        });
        for i in 0..n {
            for j in i..n {
                let v = buf[i * n + j];
                if !v.is_finite() {
                    return Err(SpectralError::NonFinite(i, j));
                }
            }
        }
        Ok(Mat::from_fn(n, n, |i, j| if i <= j { buf[i * n + j] } else { buf[j * n + i] }))
    }

    /// `G[i][j] = H(xs[i], ys[j])`.
    pub fn cross_prepared(&self, xs: &[PreparedSignal], ys: &[PreparedSignal]) -> Result<Mat<f64>, SpectralError> {
        let (n, m) = (xs.len(), ys.len());
        let mut buf = vec![0.0; n * m];
        if n > 0 && m > 0 {
            exec::for_each_chunk(&mut buf, m, |i, row| {
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = self.eval_symmetric(&xs[i], &ys[j]);
                }
            });
        }
        if let Some(p) = buf.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite(p / m, p % m));
        }
        Ok(Mat::from_fn(n, m, |i, j| buf[i * m + j]))
    }
}

fn has_popcnt() -> bool {
    #[cfg(target_arch = "x86_64")]
    {
        std::arch::is_x86_feature_detected!("popcnt")
    }
    #[cfg(not(target_arch = "x86_64"))]
    {
        false
    }
}

pub fn kernel_eval(arch: &ConvArchitecture, kernel: &InnerProductKernel, x: &BinarySignal, y: &BinarySignal) -> Result<f64, SpectralError> {
    KernelEvaluator::new(arch, kernel)?.eval(x, y)
}

pub fn gram_matrix(arch: &ConvArchitecture, kernel: &InnerProductKernel, xs: &[BinarySignal]) -> Result<Mat<f64>, SpectralError> {
    let ev = KernelEvaluator::new(arch, kernel)?;
    ev.gram_prepared(&ev.prepare_all(xs)?)
}

pub fn cross_gram(arch: &ConvArchitecture, kernel: &InnerProductKernel, xs: &[BinarySignal], ys: &[BinarySignal]) -> Result<Mat<f64>, SpectralError> {
    let ev = KernelEvaluator::new(arch, kernel)?;
    ev.cross_prepared(&ev.prepare_all(xs)?, &ev.prepare_all(ys)?)
}
