use conv_spectral::{spectrum, ConvArchitecture};
use inner_kernel::{gegenbauer_coeffs, KernelDescriptor};
use krr_lab::{exact_risk, label, sample_inputs, shrinkage_predict, split_rng, stream, KrrSolver};
use serde::Serialize;

use crate::target::{build_target, TargetSpec};
use crate::HarnessError;

/// Level `s` with `d q^{s-1} <= n < d q^s`: modes of degree below `s` are learned and
/// degree `s` sits at the shrinkage scale.
pub fn default_level(d: usize, q: usize, n: usize) -> usize {
    let mut s = 1;
    let mut bound = d.saturating_mul(q);
    while q >= 2 && bound <= n {
        s += 1;
        bound = bound.saturating_mul(q);
    }
    s
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShrinkageComparison {
    pub d: usize,
    pub q: usize,
    pub n: usize,
    pub s: usize,
    pub lambda: f64,
    pub lambda_eff: f64,
    pub predicted_risk: f64,
    pub empirical_mean: f64,
    pub empirical_std: f64,
    pub seeds: usize,
    /// `|predicted - empirical| / empirical`.
    pub relative_gap: f64,
}

/// Shrinkage prediction for the patch kernel without pooling against the exact risk of
/// `seeds` KRR fits.
#[allow(clippy::too_many_arguments)]
pub fn shrinkage_comparison(
    d: usize,
    q: usize,
    n: usize,
    s: usize,
    lambda: f64,
    kernel: &KernelDescriptor,
    target: &TargetSpec,
    seeds: usize,
    master_seed: u64,
) -> Result<ShrinkageComparison, HarnessError> {
    let arch = ConvArchitecture::ck(d, q)?;
    let k = gegenbauer_coeffs(kernel, q)?;
    let spec = spectrum(&arch, &k)?;
    let f = build_target(target, d)?;
    let pred = shrinkage_predict(&f, &spec, n, lambda, s)?;
    let mut risks = Vec::with_capacity(seeds);
    for seed in 0..seeds as u64 {
        let xs = sample_inputs(d, n, &mut split_rng(master_seed, stream::DATA, seed, n as u64));
        let ys = label(&f, &xs, 0.0, &mut split_rng(master_seed, stream::NOISE, seed, n as u64))?;
        let model = KrrSolver::new(&arch, &k, xs, lambda)?.solve(&ys)?;
        risks.push(exact_risk(&model, &f, &spec)?.risk);
    }
    let mean = risks.iter().sum::<f64>() / seeds.max(1) as f64;
    let std = if seeds > 1 { (risks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64).sqrt() } else { 0.0 };
    Ok(ShrinkageComparison {
        d,
        q,
        n,
        s,
        lambda,
        lambda_eff: pred.lambda_eff,
        predicted_risk: pred.risk,
        empirical_mean: mean,
        empirical_std: std,
        seeds,
        relative_gap: (pred.risk - mean).abs() / mean,
    })
}
