use std::io::Write;

use conv_spectral::{spectrum, ConvArchitecture, KernelSpectrum};
use krr_lab::{exact_risk, label, monte_carlo_risk, sample_inputs, split_rng, stream, KrrSolver, RiskEstimate, RiskRow};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::config::{ArchKind, ExperimentConfig, RiskPolicy};
use crate::target::build_target;
use crate::HarnessError;

/// Mean and spread of the risk over seeds at one sample size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub arch: String,
    pub kernel: String,
    pub target: String,
    pub n: usize,
    pub seeds: usize,
    pub mean_risk: f64,
    /// Sample standard deviation over seeds (0 for a single seed).
    pub std_risk: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveTable {
    /// One row per `(architecture, n, seed, target)`, in that nesting order.
    pub cells: Vec<RiskRow>,
    pub points: Vec<CurvePoint>,
}

impl CurveTable {
    pub fn series(&self, arch: &str, target: &str) -> Vec<&CurvePoint> {
        self.points.iter().filter(|p| p.arch == arch && p.target == target).collect()
    }

    /// Smallest `n` whose mean risk is below `level`.
    pub fn threshold(&self, arch: &str, target: &str, level: f64) -> Option<usize> {
        self.series(arch, target).into_iter().find(|p| p.mean_risk < level).map(|p| p.n)
    }

    pub fn write_points_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `|mean_a - mean_b| <= 2 (std_a + std_b)`: the two error bars of width two standard
/// deviations overlap.
pub fn within_bands(a: &CurvePoint, b: &CurvePoint) -> bool {
    (a.mean_risk - b.mean_risk).abs() <= 2.0 * (a.std_risk + b.std_risk)
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
    (mean, var.sqrt())
}

fn use_exact(policy: RiskPolicy, arch: &ConvArchitecture) -> bool {
    match policy {
        RiskPolicy::Auto => !arch.full_patch(),
        RiskPolicy::Exact => true,
        RiskPolicy::MonteCarlo => false,
    }
}

/// Fits every `(architecture, n, seed)` cell once and scores it on every target.
///
/// Inputs depend only on `(master_seed, seed, n)`, so all architectures and targets see
/// the same samples; label noise uses a separate stream per target. Sampled risks use
/// test points from `(master_seed, seed, n)` as well.
pub fn run_learning_curve(cfg: &ExperimentConfig) -> Result<CurveTable, HarnessError> {
    cfg.validate()?;
    cfg.check_resources()?;
    let targets = cfg.targets.iter().map(|t| Ok((t.to_string(), build_target(t, cfg.d)?))).collect::<Result<Vec<_>, HarnessError>>()?;
    let kernel_label = cfg.kernel.label();
    let mut cells = Vec::new();
    let mut points = Vec::new();
    for (kind, arch) in cfg.build_architectures()? {
        let kernel = cfg.kernel_for(&arch)?;
        let spec: Option<KernelSpectrum> = if use_exact(cfg.risk, &arch) { Some(spectrum(&arch, &kernel)?) } else { None };
        for &n in &cfg.n_grid {
            let mut risks: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.seeds); targets.len()];
            for seed in 0..cfg.seeds as u64 {
                let xs = sample_inputs(cfg.d, n, &mut split_rng(cfg.master_seed, stream::DATA, seed, n as u64));
                let solver = KrrSolver::new(&arch, &kernel, xs, cfg.lambda)?;
                let mc_seed = split_rng(cfg.master_seed, stream::TEST, seed, n as u64).next_u64();
                for (t, (name, target)) in targets.iter().enumerate() {
                    let tag = stream::NOISE + ((t as u64) << 8);
                    let ys = label(target, solver.inputs(), cfg.noise_sigma, &mut split_rng(cfg.master_seed, tag, seed, n as u64))?;
                    let model = solver.solve(&ys)?;
                    let est: RiskEstimate = match &spec {
                        Some(s) => exact_risk(&model, target, s)?,
                        None => monte_carlo_risk(&model, target, cfg.mc_points, mc_seed)?,
                    };
                    log::info!("{} n={n} seed={seed} {name}: risk {:.4e}", kind.name(), est.risk);
                    risks[t].push(est.risk);
                    cells.push(RiskRow {
                        arch: kind.name().into(),
                        kernel: kernel_label.clone(),
                        target: name.clone(),
                        n,
                        seed,
                        lambda: cfg.lambda,
                        risk: est.risk,
                        risk_stderr: est.stderr,
                        mode: est.mode.name().into(),
                    });
                }
            }
            for (t, (name, _)) in targets.iter().enumerate() {
                let (mean, std) = mean_std(&risks[t]);
                points.push(CurvePoint {
                    arch: kind.name().into(),
                    kernel: kernel_label.clone(),
                    target: name.clone(),
                    n,
                    seeds: cfg.seeds,
                    mean_risk: mean,
                    std_risk: std,
                });
            }
        }
    }
    Ok(CurveTable { cells, points })
}

/// Architecture names in the order they appear in `cfg`.
pub fn arch_names(cfg: &ExperimentConfig) -> Vec<&'static str> {
    cfg.architectures.iter().map(|k: &ArchKind| k.name()).collect()
}
