use std::io::Write;

use conv_spectral::{exec, spectrum, KernelSpectrum, Mode};
use hypercube_core::BinarySignal;
use serde::{Deserialize, Serialize};

use crate::data::{split_rng, stream};
use crate::{FourierTarget, KrrError, KrrModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RiskMode {
    /// Expansion of the predictor in the kernel's eigenmodes.
    Exact,
    /// Average over `m` fresh uniform points drawn from `seed`.
    MonteCarlo { m: usize, seed: u64 },
}

impl RiskMode {
    pub fn name(&self) -> &'static str {
        match self {
            RiskMode::Exact => "exact",
            RiskMode::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskEstimate {
    pub risk: f64,
    /// Standard error of the estimate; zero in exact mode.
    pub stderr: f64,
    pub mode: RiskMode,
}

/// `E_x (f(x) - fhat(x))^2`. Exact mode builds the kernel spectrum first; callers that
/// evaluate many models of one kernel should build it once and use [`exact_risk`].
pub fn test_risk(model: &KrrModel, target: &FourierTarget, mode: RiskMode) -> Result<RiskEstimate, KrrError> {
    match mode {
        RiskMode::Exact => {
            let spec = spectrum(model.arch(), model.kernel())?;
            exact_risk(model, target, &spec)
        }
        RiskMode::MonteCarlo { m, seed } => monte_carlo_risk(model, target, m, seed),
    }
}

/// Coordinates of the predictor in the parity basis of each spectral class:
/// `u_T = sum_m lambda_m psi_m(T) sum_i alpha_i psi_m(x_i)`.
pub fn predictor_coefficients(model: &KrrModel, spec: &KernelSpectrum) -> Result<Vec<Vec<f64>>, KrrError> {
    let d = model.arch().d;
    if spec.d != d {
        return Err(KrrError::Dimension { got: spec.d, expected: d });
    }
    let mut by_class: Vec<Vec<&Mode>> = vec![Vec::new(); spec.classes.len()];
    for m in &spec.modes {
        by_class[m.class].push(m);
    }
    let xs = model.inputs();
    let alpha = model.alpha();
    Ok(exec::map_indexed(spec.classes.len(), |c| {
        let class = &spec.classes[c];
        let mut u = vec![0.0; class.members.len()];
        if by_class[c].is_empty() {
            return u;
        }
        let mut a = vec![0.0; class.members.len()];
        for (x, &w) in xs.iter().zip(alpha) {
            for (slot, p) in a.iter_mut().zip(class.parities(x)) {
                *slot += w * p;
            }
        }
        for mode in &by_class[c] {
            let proj = mode.lambda * mode.vector.dot(&a);
            for (k, v) in mode.vector.entries() {
                u[k] += proj * v;
            }
        }
        u
    }))
}

/// `||f||^2 + sum_T (u_T^2 - 2 c_T u_T)` over the predictor's parity coordinates.
pub fn exact_risk(model: &KrrModel, target: &FourierTarget, spec: &KernelSpectrum) -> Result<RiskEstimate, KrrError> {
    if target.dim() != spec.d {
        return Err(KrrError::Dimension { got: target.dim(), expected: spec.d });
    }
    let coords = predictor_coefficients(model, spec)?;
    let mut risk = target.norm_sq();
    for (class, u) in spec.classes.iter().zip(&coords) {
        for (member, &ut) in class.members.iter().zip(u) {
            if ut != 0.0 {
                risk += ut * (ut - 2.0 * target.coeff(member));
            }
        }
    }
    Ok(RiskEstimate { risk, stderr: 0.0, mode: RiskMode::Exact })
}

/// `||fhat||^2_{L^2}` from the predictor's parity coordinates.
pub fn predictor_norm_sq(model: &KrrModel, spec: &KernelSpectrum) -> Result<f64, KrrError> {
    Ok(predictor_coefficients(model, spec)?.iter().flatten().map(|u| u * u).sum())
}

pub fn monte_carlo_risk(model: &KrrModel, target: &FourierTarget, m: usize, seed: u64) -> Result<RiskEstimate, KrrError> {
    if m < 2 {
        return Err(KrrError::TooFewTestPoints(m));
    }
    let d = model.arch().d;
    if target.dim() != d {
        return Err(KrrError::Dimension { got: target.dim(), expected: d });
    }
    let mut rng = split_rng(seed, stream::TEST, 0, m as u64);
    let xs: Vec<BinarySignal> = (0..m).map(|_| BinarySignal::random(d, &mut rng)).collect();
    let truth = xs.iter().map(|x| target.eval(x)).collect::<Result<Vec<f64>, _>>()?;
    let prepared = model.evaluator().prepare_all(&xs)?;
    let errs = exec::map_indexed(m, |i| (truth[i] - model.predict_prepared(&prepared[i])).powi(2));
    let mean = errs.iter().sum::<f64>() / m as f64;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
    Ok(RiskEstimate { risk: mean, stderr: (var / m as f64).sqrt(), mode: RiskMode::MonteCarlo { m, seed } })
}

/// One line of a risk report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskRow {
    pub arch: String,
    pub kernel: String,
    pub target: String,
    pub n: usize,
    pub seed: u64,
    pub lambda: f64,
    pub risk: f64,
    pub risk_stderr: f64,
    pub mode: String,
}

pub fn write_risk_csv<W: Write>(rows: &[RiskRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
