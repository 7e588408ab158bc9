use hypercube_core::binomial;

use crate::KernelError;

/// `Q_l^{(q)}(m)` by the upward three-term recurrence
/// `Q_{l+1} = (m Q_l - l Q_{l-1}) / (q - l)`, `Q_0 = 1`, `Q_1 = m/q`.
pub fn gegenbauer_eval(q: usize, l: usize, m: i64) -> Result<f64, KernelError> {
    if q == 0 {
        return Err(KernelError::ZeroQ);
    }
    if l > q {
        return Err(KernelError::BadDegree { q, l });
    }
    if m.unsigned_abs() as usize > q || (q as i64 - m).rem_euclid(2) != 0 {
        return Err(KernelError::BadInnerProduct { q, m });
    }
    Ok(column(q, m)[l])
}

fn column(q: usize, m: i64) -> Vec<f64> {
    let mut out = vec![0.0; q + 1];
    out[0] = 1.0;
    out[1] = m as f64 / q as f64;
    for l in 1..q {
        out[l + 1] = (m as f64 * out[l] - l as f64 * out[l - 1]) / (q - l) as f64;
    }
    out
}

/// `table[l][k] = Q_l(q - 2k)` for `l, k` in `0..=q`.
pub fn gegenbauer_table(q: usize) -> Vec<Vec<f64>> {
    assert!(q >= 1);
    let cols: Vec<Vec<f64>> = (0..=q).map(|k| column(q, q as i64 - 2 * k as i64)).collect();
    (0..=q).map(|l| cols.iter().map(|c| c[l]).collect()).collect()
}

/// `Pr[<u,e> = q - 2k] = C(q,k) / 2^q` for uniform `u`.
pub fn inner_product_law(q: usize) -> Vec<f64> {
    let scale = 0.5f64.powi(q as i32);
    (0..=q).map(|k| binomial(q, k) * scale).collect()
}

/// Coefficients of `t * g(t)` given those of `g` in the basis `C(q,l) Q_l(m)`, `t = m/q`:
/// `a'_j = (j/q) a_{j-1} + ((q-j)/q) a_{j+1}`.
pub fn multiply_by_t(a: &[f64]) -> Vec<f64> {
    let q = a.len() - 1;
    let qf = q as f64;
    (0..=q)
        .map(|j| {
            let lo = if j >= 1 { j as f64 / qf * a[j - 1] } else { 0.0 };
            let hi = if j < q { (q - j) as f64 / qf * a[j + 1] } else { 0.0 };
            lo + hi
        })
        .collect()
}
