use std::collections::BTreeMap;

use conv_spectral::KernelSpectrum;

use crate::{FourierTarget, KrrError};

/// `kappa_j` at or below `KAPPA_ZERO_TOL * omega` counts as a vanishing frequency.
pub const KAPPA_ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ShrunkMode {
    /// Position in `spectrum.modes`.
    pub mode: usize,
    pub lambda: f64,
    pub degree: usize,
    /// `lambda / (lambda + lambda_eff / n)`.
    pub factor: f64,
    pub target_coeff: f64,
    pub predicted_coeff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShrinkagePrediction {
    pub lambda_eff: f64,
    /// Modes the target has a component on.
    pub modes: Vec<ShrunkMode>,
    /// Target mass outside the span of the kernel's nonzero modes.
    pub off_span: f64,
    pub risk: f64,
}

/// Effective ridge `lambda + sum of eigenvalues of modes with degree > s`.
pub fn effective_ridge(spec: &KernelSpectrum, lambda: f64, s: usize) -> f64 {
    lambda + spec.modes.iter().filter(|m| m.degree > s).map(|m| m.lambda).sum::<f64>()
}

/// Shrinkage-operator prediction of the KRR fit with `n` samples: every mode coefficient
/// `c_j` of the target is multiplied by `lambda_j / (lambda_j + lambda_eff / n)`.
pub fn shrinkage_predict(target: &FourierTarget, spec: &KernelSpectrum, n: usize, lambda: f64, s: usize) -> Result<ShrinkagePrediction, KrrError> {
    if n == 0 {
        return Err(KrrError::Empty);
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(KrrError::BadRidge(lambda));
    }
    if target.dim() != spec.d {
        return Err(KrrError::Dimension { got: target.dim(), expected: spec.d });
    }
    let lambda_eff = effective_ridge(spec, lambda, s);
    let mu = lambda_eff / n as f64;
    let index = spec.member_index();
    let mut class_coords: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (set, &c) in target.coeffs() {
        if let Some(&(class, pos)) = index.get(set) {
            class_coords.entry(class).or_insert_with(|| vec![0.0; spec.classes[class].members.len()])[pos] = c;
        }
    }
    let mut modes = Vec::new();
    let mut captured = 0.0;
    let mut risk = 0.0;
    for (j, m) in spec.modes.iter().enumerate() {
        let Some(coords) = class_coords.get(&m.class) else { continue };
        let c = m.vector.dot(coords);
        if c == 0.0 {
            continue;
        }
        let factor = m.lambda / (m.lambda + mu);
        captured += c * c;
        risk += (c * (1.0 - factor)).powi(2);
        modes.push(ShrunkMode { mode: j, lambda: m.lambda, degree: m.degree, factor, target_coeff: c, predicted_coeff: factor * c });
    }
    let off_span = (target.norm_sq() - captured).max(0.0);
    Ok(ShrinkagePrediction { lambda_eff, modes, off_span, risk: risk + off_span })
}

/// `sum_j lambda_j / (lambda_j + lambda)` over the spectrum's modes.
pub fn effective_dimension(spec: &KernelSpectrum, lambda: f64) -> Result<f64, KrrError> {
    effective_dimension_of(spec.modes.iter().map(|m| m.lambda), lambda)
}

pub fn effective_dimension_of(eigenvalues: impl IntoIterator<Item = f64>, lambda: f64) -> Result<f64, KrrError> {
    if lambda.is_nan() || lambda <= 0.0 {
        return Err(KrrError::NonPositiveRidge(lambda));
    }
    Ok(eigenvalues.into_iter().map(|l| l / (l + lambda)).sum())
}

/// `d_eff = sum_{j: kappa_j > 0} (kappa_j / omega)^{1/alpha}`.
pub fn pooled_effective_dim(kappa: &[f64], omega: usize, alpha: f64) -> Result<f64, KrrError> {
    if alpha.is_nan() || alpha <= 1.0 {
        return Err(KrrError::BadAlpha(alpha));
    }
    let w = omega as f64;
    Ok(kappa.iter().filter(|&&k| k > KAPPA_ZERO_TOL * w).map(|k| (k / w).powf(1.0 / alpha)).sum())
}
