use hypercube_core::binomial;
use serde::{Deserialize, Serialize};

use crate::gegenbauer::{gegenbauer_table, inner_product_law, multiply_by_t};
use crate::ntk::{ntk_from_activation, Activation, ActivationKind, Quadrature};
use crate::{KernelError, PSD_TOL};

/// Where a kernel came from. JSON form: `{"kind":"poly","coeffs":[...]}`,
/// `{"kind":"table","values":[...]}` or `{"kind":"ntk","activation":"relu","params":[]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KernelDescriptor {
    /// `h(t) = sum_i coeffs[i] t^i`.
    Poly { coeffs: Vec<f64> },
    /// `h` at `t = -1, -1 + 2/q, ..., 1` (increasing order, `q + 1` values).
    Table { values: Vec<f64> },
    /// Tangent kernel of a one-hidden-layer network with this activation.
    Ntk {
        activation: ActivationKind,
        #[serde(default)]
        params: Vec<f64>,
    },
}

impl KernelDescriptor {
    pub fn poly(coeffs: &[f64]) -> Self {
        Self::Poly { coeffs: coeffs.to_vec() }
    }

    /// `h(t) = sum_{i=1}^{5} 0.2 t^i`.
    pub fn experiment() -> Self {
        Self::poly(&[0.0, 0.2, 0.2, 0.2, 0.2, 0.2])
    }

    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            Self::Poly { coeffs } => {
                let terms: Vec<String> = coeffs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, c)| format!("{c}t^{i}")).collect();
                format!("poly({})", terms.join("+"))
            }
            Self::Table { .. } => "table".to_string(),
            Self::Ntk { activation, .. } => format!("ntk({activation:?})").to_lowercase(),
        }
    }
}

/// Inner-product kernel on `{-1,+1}^q` with its Gegenbauer coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProductKernel {
    q: usize,
    xi: Vec<f64>,
    /// `values[k] = h((q - 2k)/q)`, i.e. indexed by the number of disagreeing coordinates.
    values: Vec<f64>,
    source: KernelDescriptor,
}

impl InnerProductKernel {
    /// Builds from `values[k] = h((q-2k)/q)`; coefficients by exact binomial quadrature.
    pub fn from_values(q: usize, values: Vec<f64>, source: KernelDescriptor) -> Result<Self, KernelError> {
        if q == 0 {
            return Err(KernelError::ZeroQ);
        }
        if values.len() != q + 1 {
            return Err(KernelError::TableLength { expected: q + 1, got: values.len() });
        }
        for (k, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(KernelError::NonFinite { t: (q as f64 - 2.0 * k as f64) / q as f64 });
            }
        }
        let law = inner_product_law(q);
        let table = gegenbauer_table(q);
        let xi = table.iter().map(|ql| (0..=q).map(|k| law[k] * values[k] * ql[k]).sum()).collect();
        Self::from_parts(q, xi, values, source)
    }

    /// Builds from coefficients; values come from the reconstruction formula.
    pub fn from_xi(q: usize, xi: Vec<f64>, source: KernelDescriptor) -> Result<Self, KernelError> {
        if q == 0 {
            return Err(KernelError::ZeroQ);
        }
        if xi.len() != q + 1 {
            return Err(KernelError::TableLength { expected: q + 1, got: xi.len() });
        }
        let table = gegenbauer_table(q);
        let values = (0..=q).map(|k| (0..=q).map(|l| xi[l] * binomial(q, l) * table[l][k]).sum()).collect();
        Self::from_parts(q, xi, values, source)
    }

    fn from_parts(q: usize, mut xi: Vec<f64>, values: Vec<f64>, source: KernelDescriptor) -> Result<Self, KernelError> {
        for (l, x) in xi.iter_mut().enumerate() {
            if !x.is_finite() || *x < -PSD_TOL {
                return Err(KernelError::NotPsd { l, value: *x });
            }
            if *x < 0.0 {
                if *x < -1e-14 {
                    log::warn!("clamping xi_{l} = {x:e} to zero");
                }
                *x = 0.0;
            }
        }
        Ok(Self { q, xi, values, source })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `(xi_{q,0}, ..., xi_{q,q})`.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn source(&self) -> &KernelDescriptor {
        &self.source
    }

    /// `values()[k] = h((q-2k)/q)`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `h(m/q)` for an admissible inner product `m`.
    pub fn value_at(&self, m: i64) -> Result<f64, KernelError> {
        let q = self.q as i64;
        if m.abs() > q || (q - m).rem_euclid(2) != 0 {
            return Err(KernelError::BadInnerProduct { q: self.q, m });
        }
        Ok(self.values[((q - m) / 2) as usize])
    }

    pub fn h_one(&self) -> f64 {
        self.values[0]
    }

    /// `sum_l xi_l C(q,l) Q_l(m)`.
    pub fn reconstruct(&self, m: i64) -> Result<f64, KernelError> {
        let mut acc = 0.0;
        for l in 0..=self.q {
            acc += self.xi[l] * binomial(self.q, l) * crate::gegenbauer_eval(self.q, l, m)?;
        }
        Ok(acc)
    }

    /// `h_{q,>s}(1) = sum_{l>s} xi_l C(q,l)`.
    pub fn tail_mass(&self, s: usize) -> f64 {
        (s + 1..=self.q).map(|l| self.xi[l] * binomial(self.q, l)).sum()
    }

    /// The same kernel with `xi_0` set to zero.
    pub fn centered(&self) -> Self {
        let mut xi = self.xi.clone();
        xi[0] = 0.0;
        Self::from_xi(self.q, xi, self.source.clone()).expect("centering keeps PSD")
    }
}

/// `xi_{q,l}(h)` for a descriptor. Polynomials are expanded exactly through the
/// `t`-multiplication recurrence, so `xi_l = 0` exactly above the degree.
pub fn gegenbauer_coeffs(desc: &KernelDescriptor, q: usize) -> Result<InnerProductKernel, KernelError> {
    if q == 0 {
        return Err(KernelError::ZeroQ);
    }
    match desc {
        KernelDescriptor::Poly { coeffs } => {
            let mut power = vec![0.0; q + 1];
            power[0] = 1.0;
            let mut xi = vec![0.0; q + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                if i > 0 {
                    power = multiply_by_t(&power);
                }
                if !c.is_finite() {
                    return Err(KernelError::NonFinite { t: f64::NAN });
                }
                for (x, p) in xi.iter_mut().zip(&power) {
                    *x += c * p;
                }
            }
            let values = (0..=q)
                .map(|k| {
                    let t = (q as f64 - 2.0 * k as f64) / q as f64;
                    coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
                })
                .collect();
            InnerProductKernel::from_parts(q, xi, values, desc.clone())
        }
        KernelDescriptor::Table { values } => {
            if values.len() != q + 1 {
                return Err(KernelError::TableLength { expected: q + 1, got: values.len() });
            }
            let by_k: Vec<f64> = values.iter().rev().copied().collect();
            InnerProductKernel::from_values(q, by_k, desc.clone())
        }
        KernelDescriptor::Ntk { activation, params } => {
            let act = Activation::from_kind(*activation, params)?;
            let ntk = ntk_from_activation(&act, q, Quadrature::Exact)?;
            InnerProductKernel::from_xi(q, ntk.xi, desc.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_and_linear() {
        let k = gegenbauer_coeffs(&KernelDescriptor::poly(&[1.0]), 6).unwrap();
        assert_eq!(k.xi(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let k = gegenbauer_coeffs(&KernelDescriptor::poly(&[0.0, 1.0]), 5).unwrap();
        assert!((k.xi()[1] - 0.2).abs() < 1e-15);
        assert!(k.xi().iter().enumerate().all(|(l, x)| l == 1 || *x == 0.0));
    }

    #[test]
    fn square_q2() {
        let k = gegenbauer_coeffs(&KernelDescriptor::poly(&[0.0, 0.0, 1.0]), 2).unwrap();
        assert_eq!(k.xi(), &[0.5, 0.0, 0.5]);
    }

    #[test]
    fn table_order_is_increasing_t() {
        let k = gegenbauer_coeffs(&KernelDescriptor::Table { values: vec![-1.0, 0.0, 1.0] }, 2).unwrap();
        assert_eq!(k.value_at(2).unwrap(), 1.0);
        assert!((k.xi()[1] - 0.5).abs() < 1e-15);
        assert!(gegenbauer_coeffs(&KernelDescriptor::Table { values: vec![1.0] }, 2).is_err());
    }

    #[test]
    fn indefinite_rejected_and_noise_clamped() {
        let neg = InnerProductKernel::from_xi(2, vec![1.0, -1e-3, 0.0], KernelDescriptor::poly(&[]));
        assert!(matches!(neg, Err(KernelError::NotPsd { l: 1, .. })));
        let tiny = InnerProductKernel::from_xi(2, vec![1.0, -1e-12, 0.0], KernelDescriptor::poly(&[])).unwrap();
        assert_eq!(tiny.xi()[1], 0.0);
    }

    #[test]
    fn descriptor_json() {
        let d: KernelDescriptor = serde_json::from_str(r#"{"kind":"poly","coeffs":[0,1]}"#).unwrap();
        assert_eq!(d, KernelDescriptor::poly(&[0.0, 1.0]));
        let n: KernelDescriptor = serde_json::from_str(r#"{"kind":"ntk","activation":"relu"}"#).unwrap();
        assert!(matches!(n, KernelDescriptor::Ntk { activation: ActivationKind::Relu, .. }));
    }
}
