#![allow(dead_code)]

use conv_spectral::ConvArchitecture;
use hypercube_core::{BinarySignal, IndexSet};
use inner_kernel::{gegenbauer_coeffs, InnerProductKernel, KernelDescriptor};
use krr_lab::FourierTarget;

pub fn kernel(coeffs: &[f64], q: usize) -> InnerProductKernel {
    gegenbauer_coeffs(&KernelDescriptor::poly(coeffs), q).unwrap()
}

pub fn experiment_kernel(q: usize) -> InnerProductKernel {
    gegenbauer_coeffs(&KernelDescriptor::experiment(), q).unwrap()
}

/// `sum_i sign_i x_i x_{i+1} ... x_{i+l-1} / sqrt(d)`.
pub fn chain(d: usize, l: usize, alternating: bool) -> FourierTarget {
    let c = 1.0 / (d as f64).sqrt();
    FourierTarget::new(
        d,
        (0..d).map(|i| {
            let s = IndexSet::new((0..l).map(|t| (i + t) % d).collect(), d).unwrap();
            (s, if alternating && i % 2 == 1 { -c } else { c })
        }),
    )
    .unwrap()
}

pub fn all_points(d: usize) -> Vec<BinarySignal> {
    (0..1u64 << d).map(|b| BinarySignal::from_bits(d, b)).collect()
}

pub fn small_archs() -> Vec<ConvArchitecture> {
    vec![
        ConvArchitecture::ck(8, 3).unwrap(),
        ConvArchitecture::ck_ap(8, 3, 2).unwrap(),
        ConvArchitecture::ck_gp(8, 3).unwrap(),
        ConvArchitecture::ck_ap_ds(8, 3, 2, 2).unwrap(),
        ConvArchitecture::ck_ap(10, 4, 5).unwrap(),
        ConvArchitecture::ck_ap_ds(10, 4, 5, 5).unwrap(),
        ConvArchitecture::non_overlapping(8, 2, 4).unwrap(),
        ConvArchitecture::fc(8),
        ConvArchitecture::fc_gp(8),
    ]
}
