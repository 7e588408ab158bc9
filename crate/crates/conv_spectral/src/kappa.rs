use std::f64::consts::PI;

use crate::arch::Filter;

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `cos(2 pi k / d)` with `k` folded into `[0, d/2]`, so frequencies `j` and `d - j`
/// give bit-identical values.
fn cos_frac(k: usize, d: usize) -> f64 {
    let k = k % d;
    let k = k.min(d - k);
    (2.0 * PI * k as f64 / d as f64).cos()
}

/// Average-pooling weights `kappa_j = (1/omega) sum_{|e| < omega} (omega - |e|) cos(2 pi j e / d)`
/// for `j` in `0..d`. Index 0 is the constant frequency (the `j = d` of 1-based notation),
/// where the value is exactly `omega`.
pub fn kappa_weights(d: usize, omega: usize) -> Vec<f64> {
    assert!(omega >= 1 && omega <= d, "omega must lie in 1..=d");
    (0..d)
        .map(|j| {
            if j == 0 {
                return omega as f64;
            }
            let mut acc = omega as f64;
            for e in 1..omega {
                acc += 2.0 * (omega - e) as f64 * cos_frac(j * e, d);
            }
            acc / omega as f64
        })
        .collect()
}

/// Exact rule: `kappa_j = 0` iff `d` divides `j * omega` and `d` does not divide `j`.
pub fn kappa_is_zero(d: usize, omega: usize, j: usize) -> bool {
    !j.is_multiple_of(d) && (j * omega).is_multiple_of(d)
}

/// `gcd(omega, d) - 1`.
pub fn kappa_zero_count(d: usize, omega: usize) -> usize {
    gcd(omega, d) - 1
}

/// Weighted-pooling weights `(sum_s tau(dist(s)) cos(2 pi j s / d))^2`, the DFT of the
/// autocorrelation of the filter row.
pub fn filter_weights(d: usize, filter: &Filter) -> Vec<f64> {
    let tau: Vec<f64> = (0..d).map(|s| filter.tau(s.min(d - s))).collect();
    (0..d)
        .map(|j| {
            let s: f64 = tau.iter().enumerate().map(|(i, t)| t * cos_frac(j * i, d)).sum();
            s * s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        assert!(kappa_weights(9, 1).iter().all(|&k| k == 1.0));
        let g = kappa_weights(9, 9);
        assert_eq!(g[0], 9.0);
        assert!(g[1..].iter().all(|k| k.abs() < 1e-12));
    }

    #[test]
    fn zero_rule_matches_numbers() {
        for d in 2..40 {
            for w in 1..=d {
                let k = kappa_weights(d, w);
                let exact = (1..d).filter(|&j| kappa_is_zero(d, w, j)).count();
                let numeric = (1..d).filter(|&j| k[j].abs() < 1e-9).count();
                assert_eq!(exact, kappa_zero_count(d, w));
                assert_eq!(numeric, exact, "d={d} w={w}");
            }
        }
    }

    #[test]
    fn filter_weights_nonnegative_and_symmetric() {
        let w = filter_weights(20, &Filter::Gaussian { sigma: 2.0 });
        for j in 1..20 {
            assert_eq!(w[j], w[20 - j]);
            assert!(w[j] >= 0.0);
        }
    }
}
