use std::collections::HashMap;
use std::sync::Arc;

use conv_spectral::exec;
use conv_spectral::linalg::{sym_eigen, Cholesky};
use conv_spectral::{ConvArchitecture, KernelEvaluator, PreparedSignal};
use faer::Mat;
use hypercube_core::BinarySignal;
use inner_kernel::{InnerProductKernel, KernelDescriptor};
use serde::{Deserialize, Serialize};

use crate::{Dataset, KrrError};

/// Ridge used by the learning-curve experiments.
pub const DEFAULT_RIDGE: f64 = 1e-6;
/// Relative eigenvalue cutoff of the minimum-norm solve.
pub const PINV_CUTOFF: f64 = 1e-12;

struct Design {
    arch: ConvArchitecture,
    kernel: InnerProductKernel,
    evaluator: KernelEvaluator,
    xs: Vec<BinarySignal>,
    prepared: Vec<PreparedSignal>,
}

enum Factor {
    Cholesky(Cholesky),
    /// Eigenpairs of `G`, used when `G + lambda I` is singular or not numerically definite.
    Eigen {
        values: Vec<f64>,
        vectors: Mat<f64>,
        cutoff: f64,
    },
}

/// One factorization of `G + lambda I`, reusable for any number of label vectors.
pub struct KrrSolver {
    design: Arc<Design>,
    lambda: f64,
    factor: Factor,
}

impl KrrSolver {
    pub fn new(arch: &ConvArchitecture, kernel: &InnerProductKernel, xs: Vec<BinarySignal>, lambda: f64) -> Result<Self, KrrError> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(KrrError::BadRidge(lambda));
        }
        if xs.is_empty() {
            return Err(KrrError::Empty);
        }
        let evaluator = KernelEvaluator::new(arch, kernel)?;
        let prepared = evaluator.prepare_all(&xs)?;
        let mut g = evaluator.gram_prepared(&prepared)?;
        let factor = factorize(&mut g, lambda)?;
        drop(g);
        let design = Design { arch: arch.clone(), kernel: kernel.clone(), evaluator, xs, prepared };
        Ok(Self { design: Arc::new(design), lambda, factor })
    }

    pub fn n(&self) -> usize {
        self.design.xs.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn inputs(&self) -> &[BinarySignal] {
        &self.design.xs
    }

    /// Fits labels `ys` against the factored design.
    pub fn solve(&self, ys: &[f64]) -> Result<KrrModel, KrrError> {
        let n = self.n();
        if ys.len() != n {
            return Err(KrrError::LengthMismatch { inputs: n, labels: ys.len() });
        }
        if self.lambda == 0.0 {
            check_duplicates(&self.design.xs, ys)?;
        }
        let y = Mat::from_fn(n, 1, |i, _| ys[i]);
        let alpha: Vec<f64> = match &self.factor {
            Factor::Cholesky(llt) => {
                let a = llt.solve(&y);
                (0..n).map(|i| a[(i, 0)]).collect()
            }
            Factor::Eigen { values, vectors, cutoff } => {
                let mut alpha = vec![0.0; n];
                for (k, &mu) in values.iter().enumerate() {
                    let shifted = mu + self.lambda;
                    let keep = if self.lambda > 0.0 { shifted > *cutoff } else { mu > *cutoff };
                    if !keep {
                        continue;
                    }
                    let coef = (0..n).map(|i| vectors[(i, k)] * ys[i]).sum::<f64>() / shifted;
                    for (i, a) in alpha.iter_mut().enumerate() {
                        *a += coef * vectors[(i, k)];
                    }
                }
                alpha
            }
        };
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(KrrError::Solve("non-finite dual coefficients".into()));
        }
        Ok(KrrModel { design: Arc::clone(&self.design), lambda: self.lambda, alpha })
    }
}

fn factorize(g: &mut Mat<f64>, lambda: f64) -> Result<Factor, KrrError> {
    if lambda > 0.0 {
        for i in 0..g.nrows() {
            g[(i, i)] += lambda;
        }
        if let Some(llt) = Cholesky::new(g) {
            return Ok(Factor::Cholesky(llt));
        }
        for i in 0..g.nrows() {
            g[(i, i)] -= lambda;
        }
    }
    let (values, vectors) = sym_eigen(g)?;
    let top = values.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(Factor::Eigen { values, vectors, cutoff: PINV_CUTOFF * top })
}

fn check_duplicates(xs: &[BinarySignal], ys: &[f64]) -> Result<(), KrrError> {
    let mut seen: HashMap<&BinarySignal, usize> = HashMap::new();
    for (i, x) in xs.iter().enumerate() {
        match seen.get(x) {
            Some(&first) => {
                let (a, b) = (ys[first], ys[i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(KrrError::ConflictingDuplicates { first, second: i, y_first: a, y_second: b });
                }
            }
            None => {
                seen.insert(x, i);
            }
        }
    }
    Ok(())
}

/// `f(x) = sum_i alpha_i H(x, x_i)`. Immutable after fitting.
#[derive(Clone)]
pub struct KrrModel {
    design: Arc<Design>,
    lambda: f64,
    alpha: Vec<f64>,
}

impl std::fmt::Debug for KrrModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KrrModel").field("arch", &self.design.arch.label()).field("n", &self.n()).field("lambda", &self.lambda).finish()
    }
}

impl KrrModel {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn arch(&self) -> &ConvArchitecture {
        &self.design.arch
    }

    pub fn kernel(&self) -> &InnerProductKernel {
        &self.design.kernel
    }

    pub fn inputs(&self) -> &[BinarySignal] {
        &self.design.xs
    }

    pub fn evaluator(&self) -> &KernelEvaluator {
        &self.design.evaluator
    }

    pub fn predict_prepared(&self, x: &PreparedSignal) -> f64 {
        let ev = &self.design.evaluator;
        self.design.prepared.iter().zip(&self.alpha).map(|(xi, a)| a * ev.eval_symmetric(x, xi)).sum()
    }

    pub fn predict(&self, x: &BinarySignal) -> Result<f64, KrrError> {
        Ok(self.predict_prepared(&self.design.evaluator.prepare(x)?))
    }

    pub fn predict_many(&self, xs: &[BinarySignal]) -> Result<Vec<f64>, KrrError> {
        let prepared = self.design.evaluator.prepare_all(xs)?;
        Ok(exec::map_indexed(prepared.len(), |i| self.predict_prepared(&prepared[i])))
    }

    pub fn dump(&self) -> ModelDump {
        ModelDump {
            lambda: self.lambda,
            n: self.n(),
            arch: self.design.arch.clone(),
            kernel_ref: self.design.kernel.source().clone(),
            alpha: self.alpha.clone(),
        }
    }
}

/// JSON form of a fitted model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDump {
    pub lambda: f64,
    pub n: usize,
    pub arch: ConvArchitecture,
    pub kernel_ref: KernelDescriptor,
    pub alpha: Vec<f64>,
}

impl ModelDump {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

pub fn krr_fit(data: &Dataset, arch: &ConvArchitecture, kernel: &InnerProductKernel, lambda: f64) -> Result<KrrModel, KrrError> {
    if data.xs.len() != data.ys.len() {
        return Err(KrrError::LengthMismatch { inputs: data.xs.len(), labels: data.ys.len() });
    }
    KrrSolver::new(arch, kernel, data.xs.clone(), lambda)?.solve(&data.ys)
}
