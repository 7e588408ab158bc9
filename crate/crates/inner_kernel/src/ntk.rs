use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::gegenbauer::{gegenbauer_table, inner_product_law};
use crate::KernelError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Identity,
    Tanh,
    Poly,
}

/// Scalar activation with its derivative.
#[derive(Clone, Debug, PartialEq)]
pub enum Activation {
    /// `max(x, 0)`, derivative taken as 0 at the kink.
    Relu,
    Identity,
    Tanh,
    /// `sum_i c[i] x^i`.
    Poly(Vec<f64>),
}

impl Activation {
    pub fn from_kind(kind: ActivationKind, params: &[f64]) -> Result<Self, KernelError> {
        Ok(match kind {
            ActivationKind::Relu => Self::Relu,
            ActivationKind::Identity => Self::Identity,
            ActivationKind::Tanh => Self::Tanh,
            ActivationKind::Poly => {
                if params.is_empty() {
                    return Err(KernelError::BadActivation("poly needs coefficients".into()));
                }
                Self::Poly(params.to_vec())
            }
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Relu => x.max(0.0),
            Self::Identity => x,
            Self::Tanh => x.tanh(),
            Self::Poly(c) => c.iter().rev().fold(0.0, |acc, a| acc * x + a),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Self::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Identity => 1.0,
            Self::Tanh => 1.0 - x.tanh().powi(2),
            Self::Poly(c) => c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, a)| acc * x + i as f64 * a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quadrature {
    Exact,
    MonteCarlo { draws: usize, seed: u64 },
}

/// Coefficient bookkeeping of the tangent kernel `h = h1 + h2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ActivationNtk {
    pub q: usize,
    /// Gegenbauer coefficients of `sigma(m / sqrt q)`.
    pub chi: Vec<f64>,
    /// Gegenbauer coefficients of `sigma'(m / sqrt q)`.
    pub kappa: Vec<f64>,
    /// `zeta_l^2 = (l/q) kappa_{l-1}^2 + ((q-l)/q) kappa_{l+1}^2`.
    pub zeta2: Vec<f64>,
    /// `chi^2 + zeta^2`.
    pub xi: Vec<f64>,
    /// Standard errors of `xi` (zero for exact quadrature).
    pub xi_stderr: Vec<f64>,
}

fn project(q: usize, f: impl Fn(f64) -> f64) -> Result<Vec<f64>, KernelError> {
    let law = inner_product_law(q);
    let table = gegenbauer_table(q);
    let sq = (q as f64).sqrt();
    let vals: Vec<f64> = (0..=q)
        .map(|k| {
            let x = (q as f64 - 2.0 * k as f64) / sq;
            let v = f(x);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(KernelError::NonFinite { t: x })
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(table.iter().map(|ql| (0..=q).map(|k| law[k] * vals[k] * ql[k]).sum()).collect())
}

/// Tangent kernel coefficients of `sigma` on patches of size `q`.
pub fn ntk_from_activation(act: &Activation, q: usize, quad: Quadrature) -> Result<ActivationNtk, KernelError> {
    if q == 0 {
        return Err(KernelError::ZeroQ);
    }
    let chi = project(q, |x| act.eval(x))?;
    let kappa = project(q, |x| act.derivative(x))?;
    let qf = q as f64;
    let zeta2: Vec<f64> = (0..=q)
        .map(|l| {
            let lo = if l >= 1 { l as f64 / qf * kappa[l - 1].powi(2) } else { 0.0 };
            let hi = if l < q { (q - l) as f64 / qf * kappa[l + 1].powi(2) } else { 0.0 };
            lo + hi
        })
        .collect();
    match quad {
        Quadrature::Exact => {
            if q > 24 {
                return Err(KernelError::QuadratureTooLarge(q));
            }
            let xi = chi.iter().zip(&zeta2).map(|(c, z)| c * c + z).collect();
            Ok(ActivationNtk { q, chi, kappa, zeta2, xi, xi_stderr: vec![0.0; q + 1] })
        }
        Quadrature::MonteCarlo { draws, seed } => {
            let (xi, xi_stderr) = ntk_monte_carlo(act, q, draws, seed)?;
            Ok(ActivationNtk { q, chi, kappa, zeta2, xi, xi_stderr })
        }
    }
}

/// Direct sampling estimate of `xi_l` from the defining expectations over `w`:
/// `h(<u,v>/q) = E_w[s(<u,w>) s(<v,w>) + s'(<u,w>) s'(<v,w>) <u,v>/q]` with `s = sigma(./sqrt q)`,
/// projected on `Q_l` with the binomial law. Returns means and standard errors.
pub fn ntk_monte_carlo(act: &Activation, q: usize, draws: usize, seed: u64) -> Result<(Vec<f64>, Vec<f64>), KernelError> {
    let law = inner_product_law(q);
    let table = gegenbauer_table(q);
    let sq = (q as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = vec![0.0; q + 1];
    let mut sum2 = vec![0.0; q + 1];
    let mut w = vec![0i64; q];
    let mut g = vec![0.0; q + 1];
    for _ in 0..draws.max(1) {
        for wi in w.iter_mut() {
            *wi = if rng.random::<bool>() { 1 } else { -1 };
        }
        // v = all-ones, u_k flips the first k coordinates so <u_k, v> = q - 2k
        let total: i64 = w.iter().sum();
        let sv = total as f64 / sq;
        let (av, dv) = (act.eval(sv), act.derivative(sv));
        let mut prefix = 0i64;
        for k in 0..=q {
            let su = (total - 2 * prefix) as f64 / sq;
            let m = (q as f64 - 2.0 * k as f64) / q as f64;
            g[k] = act.eval(su) * av + act.derivative(su) * dv * m;
            if k < q {
                prefix += w[k];
            }
        }
        for l in 0..=q {
            let est: f64 = (0..=q).map(|k| law[k] * g[k] * table[l][k]).sum();
            if !est.is_finite() {
                return Err(KernelError::NonFinite { t: sv });
            }
            sum[l] += est;
            sum2[l] += est * est;
        }
    }
    let n = draws.max(1) as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let se = sum2.iter().zip(&mean).map(|(s2, m)| ((s2 / n - m * m).max(0.0) / (n - 1.0).max(1.0)).sqrt()).collect();
    Ok((mean, se))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_gives_2t() {
        for q in 1..12 {
            let n = ntk_from_activation(&Activation::Identity, q, Quadrature::Exact).unwrap();
            for (l, x) in n.xi.iter().enumerate() {
                let want = if l == 1 { 2.0 / q as f64 } else { 0.0 };
                assert!((x - want).abs() < 1e-12, "q={q} l={l} {x}");
            }
        }
    }

    #[test]
    fn constant_activation() {
        let n = ntk_from_activation(&Activation::Poly(vec![1.0]), 5, Quadrature::Exact).unwrap();
        assert!((n.xi[0] - 1.0).abs() < 1e-14);
        assert!(n.xi[1..].iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn non_finite_rejected() {
        let bad = Activation::Poly(vec![f64::INFINITY]);
        assert!(ntk_from_activation(&bad, 3, Quadrature::Exact).is_err());
    }
}
