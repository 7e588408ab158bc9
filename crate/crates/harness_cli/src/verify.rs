use std::time::Instant;

use clap::ValueEnum;
use conv_spectral::{
    brute_force_spectra, compare_spectra, downsample_perturbation, kappa_is_zero, kappa_weights, kappa_zero_count, kernel_eval, spectrum,
    ConvArchitecture, Filter, Pooling,
};
use hypercube_core::{binomial, BinarySignal, IndexSet};
use inner_kernel::{
    gegenbauer_coeffs, gegenbauer_table, inner_product_law, ntk_from_activation, Activation, ActivationKind, InnerProductKernel, KernelDescriptor,
    Quadrature,
};
use krr_lab::{exact_risk, monte_carlo_risk, split_rng, Dataset, FourierTarget, KrrSolver};
use rand::Rng;
use serde::Serialize;

use crate::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Mercer,
    Oracle,
    Downsampling,
    Trace,
    Kappa,
    Gegenbauer,
    Zeta,
    Ntk,
    Risk,
}

impl Suite {
    pub const ALL: [Suite; 9] =
        [Suite::Mercer, Suite::Oracle, Suite::Downsampling, Suite::Trace, Suite::Kappa, Suite::Gegenbauer, Suite::Zeta, Suite::Ntk, Suite::Risk];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Mercer => "mercer",
            Suite::Oracle => "oracle",
            Suite::Downsampling => "downsampling",
            Suite::Trace => "trace",
            Suite::Kappa => "kappa",
            Suite::Gegenbauer => "gegenbauer",
            Suite::Zeta => "zeta",
            Suite::Ntk => "ntk",
            Suite::Risk => "risk",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Size {
    Small,
    Full,
}

/// One measured quantity against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(suite: Suite, name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { suite: suite.name(), name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub size: Size,
    pub seconds: f64,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

pub fn run_suite(suite: Suite, size: Size) -> Result<SuiteReport, HarnessError> {
    let start = Instant::now();
    let checks = match suite {
        Suite::Mercer => mercer(size)?,
        Suite::Oracle => oracle(size)?,
        Suite::Downsampling => downsampling(size)?,
        Suite::Trace => trace(size)?,
        Suite::Kappa => kappa(size),
        Suite::Gegenbauer => gegenbauer(size),
        Suite::Zeta => zeta(size)?,
        Suite::Ntk => ntk(size)?,
        Suite::Risk => risk(size)?,
    };
    let failed = checks.iter().filter(|c| !c.pass).count();
    Ok(SuiteReport { suite: suite.name(), size, seconds: start.elapsed().as_secs_f64(), passed: checks.len() - failed, failed, checks })
}

/// Kernels of the oracle comparisons: `t`, `t^2` and `sum_{i=1}^5 0.2 t^i`.
pub fn oracle_kernels(q: usize) -> Result<Vec<InnerProductKernel>, HarnessError> {
    [KernelDescriptor::poly(&[0.0, 1.0]), KernelDescriptor::poly(&[0.0, 0.0, 1.0]), KernelDescriptor::experiment()]
        .iter()
        .map(|k| Ok(gegenbauer_coeffs(k, q)?))
        .collect()
}

/// Every valid architecture of `{d} x {q = 3, 4} x {omega = 1, 2, 5, d} x {delta = 1, 2, omega}`,
/// deduplicated after normalization.
pub fn oracle_grid(ds: &[usize]) -> Vec<ConvArchitecture> {
    let mut out: Vec<ConvArchitecture> = Vec::new();
    for &d in ds {
        for q in [3, 4] {
            for omega in [1, 2, 5, d] {
                for delta in [1, 2, omega] {
                    if let Ok(a) = ConvArchitecture::new(d, q, Pooling::Average { omega }, delta) {
                        if !out.iter().any(|b| b.to_string() == a.to_string()) {
                            out.push(a);
                        }
                    }
                }
            }
        }
    }
    out
}

fn extra_families(d: usize) -> Vec<ConvArchitecture> {
    vec![
        ConvArchitecture::fc(d),
        ConvArchitecture::fc_gp(d),
        ConvArchitecture::non_overlapping(d, 2, 4).expect("valid"),
        ConvArchitecture::weighted(d, 3, Filter::Gaussian { sigma: 1.5 }).expect("valid"),
    ]
}

fn mercer(size: Size) -> Result<Vec<Check>, HarnessError> {
    let (pairs, ds): (usize, &[usize]) = match size {
        Size::Small => (60, &[8]),
        Size::Full => (400, &[8, 12]),
    };
    let mut archs = oracle_grid(ds);
    for &d in ds {
        archs.extend(extra_families(d));
    }
    let mut rng = split_rng(1, 0, 0, 0);
    let mut out = Vec::new();
    for arch in archs {
        let k = gegenbauer_coeffs(&KernelDescriptor::experiment(), arch.q)?;
        let spec = spectrum(&arch, &k)?;
        let mut worst = 0.0f64;
        for _ in 0..pairs {
            let x = BinarySignal::random(arch.d, &mut rng);
            let y = BinarySignal::random(arch.d, &mut rng);
            worst = worst.max((kernel_eval(&arch, &k, &x, &y)? - spec.mercer_eval(&x, &y)).abs());
        }
        out.push(Check::at_most(Suite::Mercer, format!("{arch}"), worst, 1e-10));
    }
    Ok(out)
}

/// Closed-form spectra against brute-force diagonalization of the `2^d` operator.
pub fn oracle_checks(archs: &[ConvArchitecture]) -> Result<Vec<Check>, HarnessError> {
    let mut out = Vec::new();
    for arch in archs {
        let kernels = oracle_kernels(arch.q)?;
        let brute = brute_force_spectra(arch, &kernels)?;
        let mut eig = 0.0f64;
        let mut proj = 0.0f64;
        for (k, b) in kernels.iter().zip(&brute) {
            let dist = compare_spectra(&spectrum(arch, k)?, b)?;
            eig = eig.max(dist.eigenvalue);
            proj = proj.max(dist.projector);
        }
        out.push(Check::at_most(Suite::Oracle, format!("{arch} eigenvalues"), eig, 1e-8));
        out.push(Check::at_most(Suite::Oracle, format!("{arch} projectors"), proj, 1e-6));
    }
    Ok(out)
}

fn oracle(size: Size) -> Result<Vec<Check>, HarnessError> {
    let mut archs = match size {
        Size::Small => {
            let mut a = oracle_grid(&[8]);
            a.extend([ConvArchitecture::ck_ap(10, 4, 5)?, ConvArchitecture::ck_ap_ds(10, 4, 5, 5)?, ConvArchitecture::ck_ap_ds(10, 3, 2, 2)?]);
            a
        }
        Size::Full => oracle_grid(&[8, 10, 12]),
    };
    archs.extend(extra_families(8));
    oracle_checks(&archs)
}

/// `(d, omega = delta, q, r)` tuples of the downsampling checks.
pub fn downsampling_tuples() -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    let bases: [(usize, usize, usize); 8] = [(12, 2, 5), (12, 3, 5), (12, 4, 6), (20, 5, 10), (30, 5, 10), (24, 6, 11), (30, 3, 8), (36, 4, 9)];
    for (d, w, q) in bases {
        for r in [1, q.div_ceil(2), q + 1 - w] {
            if !out.contains(&(d, w, q, r)) {
                out.push((d, w, q, r));
            }
        }
    }
    out.truncate(20);
    out
}

fn downsampling(size: Size) -> Result<Vec<Check>, HarnessError> {
    let mut tuples = downsampling_tuples();
    if size == Size::Full {
        for d in [24, 36, 40] {
            for w in [2, 3, 4, 6, 8] {
                if d % w == 0 {
                    for q in [w, d / 2 - 1] {
                        if q >= 2 && 2 * q <= d {
                            tuples.extend((1..=q).map(|r| (d, w, q, r)));
                        }
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    for (d, w, q, r) in tuples {
        let arch = ConvArchitecture::ck_ap_ds(d, q, w, w)?;
        let ds = downsample_perturbation(&arch, r)?;
        let name = format!("d={d} omega=delta={w} q={q} r={r}");
        out.push(Check::at_most(Suite::Downsampling, format!("{name} H0"), ds.h0_max(), 1e-12));
        out.push(Check::at_most(Suite::Downsampling, format!("{name} A1"), ds.a_ones_max(), 1e-12));
        if (q + 1 - r) % w == 0 {
            out.push(Check::at_most(Suite::Downsampling, format!("{name} A=0"), ds.a_max(), 1e-12));
        }
    }
    Ok(out)
}

/// Architectures of the trace check; the first group is small enough to average over the
/// whole cube.
pub fn trace_grid() -> Result<(Vec<ConvArchitecture>, Vec<ConvArchitecture>), HarnessError> {
    let enumerable = vec![
        ConvArchitecture::ck(12, 3)?,
        ConvArchitecture::ck_ap(12, 3, 2)?,
        ConvArchitecture::ck_ap(12, 4, 3)?,
        ConvArchitecture::ck_ap(12, 5, 5)?,
        ConvArchitecture::ck_gp(12, 4)?,
        ConvArchitecture::ck_ap_ds(12, 3, 3, 3)?,
        ConvArchitecture::ck_ap_ds(12, 4, 2, 4)?,
        ConvArchitecture::new(12, 4, Pooling::None, 2)?,
    ];
    let large = vec![
        ConvArchitecture::ck(30, 10)?,
        ConvArchitecture::ck_ap(30, 10, 5)?,
        ConvArchitecture::ck_ap_ds(30, 10, 5, 5)?,
        ConvArchitecture::ck_gp(30, 10)?,
    ];
    Ok((enumerable, large))
}

fn trace(size: Size) -> Result<Vec<Check>, HarnessError> {
    let (enumerable, large) = trace_grid()?;
    let mut out = Vec::new();
    let descs = match size {
        Size::Small => vec![KernelDescriptor::experiment()],
        Size::Full => {
            vec![KernelDescriptor::experiment(), KernelDescriptor::poly(&[0.5, 0.0, 1.0, 0.0, 0.3]), KernelDescriptor::poly(&[1.0, 1.0, 0.5])]
        }
    };
    for desc in &descs {
        for arch in &enumerable {
            let k = gegenbauer_coeffs(desc, arch.q)?.centered();
            let n = 1u64 << arch.d;
            let mut sum = 0.0;
            for b in 0..n {
                let x = BinarySignal::from_bits(arch.d, b);
                sum += kernel_eval(arch, &k, &x, &x)?;
            }
            let mean = sum / n as f64;
            out.push(Check::at_most(Suite::Trace, format!("{arch} {} cube average", desc.label()), (mean - k.h_one()).abs(), 1e-9));
            let spec = spectrum(arch, &k)?;
            out.push(Check::at_most(
                Suite::Trace,
                format!("{arch} {} eigenvalue sum", desc.label()),
                (spec.eigenvalue_sum() - k.h_one()).abs(),
                1e-9,
            ));
        }
        for arch in &large {
            let k = gegenbauer_coeffs(desc, arch.q)?.centered();
            let spec = spectrum(arch, &k)?;
            out.push(Check::at_most(
                Suite::Trace,
                format!("{arch} {} eigenvalue sum", desc.label()),
                (spec.eigenvalue_sum() - k.h_one()).abs(),
                1e-9,
            ));
        }
    }
    Ok(out)
}

/// Thirty `(d, omega)` pairs covering coprime, dividing and partially shared factors.
pub fn kappa_pairs() -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for d in [12, 20, 30, 36, 60, 101] {
        for w in [2, 3, 5, 6, 10, 25] {
            if w <= d && out.len() < 30 && !out.contains(&(d, w)) {
                out.push((d, w));
            }
        }
    }
    out
}

/// `kappa_0 = omega`, bitwise symmetry `kappa_j = kappa_{d-j}`, and `|kappa_j| < 1e-9`
/// exactly on the frequencies of the divisibility rule, `gcd(omega, d) - 1` of them.
pub fn kappa_checks(pairs: &[(usize, usize)]) -> Vec<Check> {
    let mut out = Vec::new();
    for &(d, w) in pairs {
        let k = kappa_weights(d, w);
        let name = format!("d={d} omega={w}");
        out.push(Check::at_most(Suite::Kappa, format!("{name} kappa_0 - omega"), (k[0] - w as f64).abs(), 0.0));
        let asym = (1..d).map(|j| (k[j] - k[d - j]).abs()).fold(0.0, f64::max);
        out.push(Check::at_most(Suite::Kappa, format!("{name} symmetry"), asym, 0.0));
        let numeric: Vec<usize> = (0..d).filter(|&j| k[j].abs() < 1e-9).collect();
        let rule: Vec<usize> = (0..d).filter(|&j| kappa_is_zero(d, w, j)).collect();
        let mismatch = if numeric == rule && rule.len() == kappa_zero_count(d, w) { 0.0 } else { 1.0 };
        out.push(Check::at_most(Suite::Kappa, format!("{name} zeros={} gcd-1={}", numeric.len(), kappa_zero_count(d, w)), mismatch, 0.0));
    }
    out
}

fn kappa(size: Size) -> Vec<Check> {
    let mut pairs = kappa_pairs();
    if size == Size::Full {
        for d in 2..=64 {
            for w in 1..=d {
                if !pairs.contains(&(d, w)) {
                    pairs.push((d, w));
                }
            }
        }
    }
    kappa_checks(&pairs)
}

fn gegenbauer(size: Size) -> Vec<Check> {
    let qs: &[usize] = match size {
        Size::Small => &[3, 8, 15, 24],
        Size::Full => &[1, 2, 3, 5, 8, 10, 15, 20, 24, 30],
    };
    let mut out = Vec::new();
    for &q in qs {
        let table = gegenbauer_table(q);
        let law = inner_product_law(q);
        let mut worst = 0.0f64;
        for l in 0..=q {
            for m in 0..=q {
                let ip: f64 = (0..=q).map(|k| law[k] * table[l][k] * table[m][k]).sum();
                let want = if l == m { 1.0 } else { 0.0 };
                worst = worst.max((ip * binomial(q, l) - want).abs());
            }
        }
        out.push(Check::at_most(Suite::Gegenbauer, format!("q={q} orthonormality"), worst, 1e-9));
    }
    out
}

fn zeta(size: Size) -> Result<Vec<Check>, HarnessError> {
    let qmax = match size {
        Size::Small => 12,
        Size::Full => 24,
    };
    let acts = [Activation::Relu, Activation::Tanh, Activation::Identity, Activation::Poly(vec![0.3, -1.0, 0.5, 0.2])];
    let mut out = Vec::new();
    for act in &acts {
        let mut worst = 0.0f64;
        for q in 1..=qmax {
            let n = ntk_from_activation(act, q, Quadrature::Exact)?;
            let lhs: f64 = (0..=q).map(|l| n.zeta2[l] * binomial(q, l)).sum();
            let rhs: f64 = (0..=q).map(|l| n.kappa[l].powi(2) * binomial(q, l)).sum();
            worst = worst.max((lhs - rhs).abs() / rhs.max(1.0));
        }
        out.push(Check::at_most(Suite::Zeta, format!("{act:?} q<={qmax} mass"), worst, 1e-10));
    }
    Ok(out)
}

fn ntk(size: Size) -> Result<Vec<Check>, HarnessError> {
    let qs: &[usize] = match size {
        Size::Small => &[1, 3, 10, 24],
        Size::Full => &[1, 2, 3, 5, 8, 10, 16, 20, 24],
    };
    let mut out = Vec::new();
    for &q in qs {
        let k = gegenbauer_coeffs(&KernelDescriptor::Ntk { activation: ActivationKind::Identity, params: vec![] }, q)?;
        let worst = (0..=q)
            .map(|i| {
                let t = (q as f64 - 2.0 * i as f64) / q as f64;
                (k.values()[i] - 2.0 * t).abs()
            })
            .fold(0.0, f64::max);
        out.push(Check::at_most(Suite::Ntk, format!("identity q={q} h=2t"), worst, 1e-12));
    }
    Ok(out)
}

fn risk(size: Size) -> Result<Vec<Check>, HarnessError> {
    let trials = match size {
        Size::Small => 6,
        Size::Full => 20,
    };
    let archs = [
        ConvArchitecture::ck(10, 3)?,
        ConvArchitecture::ck_ap(10, 4, 5)?,
        ConvArchitecture::ck_gp(8, 3)?,
        ConvArchitecture::ck_ap_ds(12, 4, 3, 3)?,
        ConvArchitecture::non_overlapping(8, 2, 4)?,
    ];
    let mut rng = split_rng(2, 0, 0, 0);
    let mut out = Vec::new();
    for t in 0..trials {
        let arch = &archs[t % archs.len()];
        let d = arch.d;
        let k = gegenbauer_coeffs(&KernelDescriptor::experiment(), arch.q)?;
        let terms: Vec<(IndexSet, f64)> = (0..4)
            .map(|_| {
                let start = rng.random_range(0..d);
                let len = rng.random_range(1..=arch.q.min(3));
                (IndexSet::new((0..len).map(|i| (start + 2 * i) % d).collect(), d), rng.random_range(-1.0..1.0))
            })
            .map(|(s, c)| s.map(|s| (s, c)))
            .collect::<Result<_, _>>()?;
        let f = FourierTarget::new(d, terms)?;
        let data = Dataset::sample(&f, 40 + 10 * t, 0.1, 3, t as u64)?;
        let model = KrrSolver::new(arch, &k, data.xs.clone(), 1e-3)?.solve(&data.ys)?;
        let spec = spectrum(arch, &k)?;
        let exact = exact_risk(&model, &f, &spec)?;
        let mc = monte_carlo_risk(&model, &f, 4000, t as u64)?;
        let z = (exact.risk - mc.risk).abs() / mc.stderr;
        out.push(Check::at_most(Suite::Risk, format!("{arch} trial {t} |exact-mc|/se"), z, 4.0));
    }
    Ok(out)
}
