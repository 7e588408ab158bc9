use conv_spectral::linalg::sym_eigenvalues;
use conv_spectral::*;
use hypercube_core::{parity_eval, BinarySignal, IndexSet};
use inner_kernel::{gegenbauer_coeffs, InnerProductKernel, KernelDescriptor};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn poly(c: &[f64], q: usize) -> InnerProductKernel {
    gegenbauer_coeffs(&KernelDescriptor::poly(c), q).unwrap()
}

fn signal(d: usize) -> impl Strategy<Value = BinarySignal> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], d).prop_map(|v| BinarySignal::new(v).unwrap())
}

/// `(d, q, omega, delta, r)` with `q <= d/2`, `delta | d`, `r <= q`.
fn pooling_params() -> impl Strategy<Value = (usize, usize, usize, usize, usize)> {
    (4usize..=30).prop_flat_map(|d| {
        let divisors: Vec<usize> = (1..=d).filter(|k| d % k == 0).collect();
        (Just(d), 1..=d / 2, 1..=d, proptest::sample::select(divisors))
            .prop_flat_map(|(d, q, w, delta)| (Just(d), Just(q), Just(w), Just(delta), 1..=q))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn global_pooling_is_shift_invariant(x in signal(12), y in signal(12), m in 0usize..12) {
        let arch = ConvArchitecture::ck_gp(12, 5).unwrap();
        let k = poly(&[0.0, 0.2, 0.2, 0.2, 0.2, 0.2], 5);
        let a = kernel_eval(&arch, &k, &x.shift(m), &y).unwrap();
        let b = kernel_eval(&arch, &k, &x, &y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn ck_diagonal_is_h_of_one(x in signal(10)) {
        let k = poly(&[0.3, 0.1, 0.5], 4);
        let v = kernel_eval(&ConvArchitecture::ck(10, 4).unwrap(), &k, &x, &x).unwrap();
        prop_assert!((v - k.h_one()).abs() < 1e-14);
    }

    #[test]
    fn fc_is_inner_product_kernel(x in signal(9), y in signal(9)) {
        let c = [0.1, 0.4, 0.3, 0.2];
        let t = x.dot(&y).unwrap() as f64 / 9.0;
        let want = c.iter().rev().fold(0.0, |acc, ci| acc * t + ci);
        let got = kernel_eval(&ConvArchitecture::fc(9), &poly(&c, 9), &x, &y).unwrap();
        prop_assert!((got - want).abs() < 1e-13);
    }

    #[test]
    fn pooling_matrix_invariants((d, q, w, delta, r) in pooling_params()) {
        let arch = ConvArchitecture::ck_ap_ds(d, q, w, delta).unwrap();
        let m = pooling_matrix(r, &arch).unwrap();
        let w = arch.omega();
        prop_assert!((m.normalized_trace() - 1.0).abs() < 1e-12);
        let (num, den) = m.prefactor.unwrap();
        let diag: u64 = (0..d).map(|i| m.counts.as_ref().unwrap()[i * d + i]).sum();
        prop_assert_eq!(diag * num, den * d as u64);
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                prop_assert_eq!(m.get(i, j), m.get((i + delta) % d, (j + delta) % d));
                let dist = (i + d - j) % d;
                if 2 * w <= d && dist.min(d - dist) >= w {
                    prop_assert_eq!(m.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn downsampling_leaves_constant_block(m in 2usize..=6, w in 2usize..=6, q in 1usize..=12, r in 1usize..=12) {
        let d = m * w;
        prop_assume!(2 * q <= d && r <= q);
        let arch = ConvArchitecture::ck_ap_ds(d, q, w, w).unwrap();
        let p = downsample_perturbation(&arch, r).unwrap();
        prop_assert!(p.h0_max() <= 1e-12);
        prop_assert!(p.a_ones_max() <= 1e-12);
        if (q + 1 - r) % w == 0 {
            prop_assert!(p.a_max() <= 1e-12);
        }
    }

    #[test]
    fn kappa_is_symmetric_fejer(d in 1usize..=60, w in 1usize..=60) {
        prop_assume!(w <= d);
        let k = kappa_weights(d, w);
        prop_assert_eq!(k[0], w as f64);
        for j in 1..d {
            prop_assert_eq!(k[j], k[d - j]);
            prop_assert!(k[j] >= -1e-12);
            prop_assert!(k[j] <= k[0] + 1e-12);
            prop_assert_eq!(kappa_is_zero(d, w, j), k[j].abs() < 1e-9);
        }
    }
}

#[test]
fn kappa_matches_unit_stride_pooling_matrix() {
    for (d, w) in [(12, 3), (15, 5), (16, 9), (10, 10), (7, 1)] {
        let arch = ConvArchitecture::ck_ap(d, 3, w).unwrap();
        let pairs = block_circulant_eig(&pooling_matrix(2, &arch).unwrap()).unwrap();
        let k = kappa_weights(d, w);
        for p in pairs {
            assert!((p.lambda - k[p.j]).abs() < 1e-12, "d={d} w={w} j={}", p.j);
        }
    }
}

#[test]
fn gaussian_filter_weights_are_autocorrelation_dft() {
    let (d, f) = (20, Filter::Gaussian { sigma: 1.7 });
    let arch = ConvArchitecture::weighted(d, 4, f.clone()).unwrap();
    let row: Vec<f64> = (0..d).map(|s| pooling_matrix(1, &arch).unwrap().get(0, s)).collect();
    let tau: Vec<f64> = (0..d).map(|s| f.tau(s.min(d - s))).collect();
    for s in 0..d {
        let auto: f64 = (0..d).map(|k| tau[k] * tau[(k + s) % d]).sum();
        assert!((row[s] - auto).abs() < 1e-14);
    }
    let w = filter_weights(d, &f);
    for (j, wj) in w.iter().enumerate() {
        let dft: f64 = (0..d).map(|s| row[s] * (2.0 * std::f64::consts::PI * (j * s) as f64 / d as f64).cos()).sum();
        assert!((wj - dft).abs() < 1e-12);
        assert!(*wj >= -1e-12);
    }
}

#[test]
fn pooling_fixture_counts() {
    let arch = ConvArchitecture::ck_ap_ds(24, 11, 5, 3).unwrap();
    // first rows as obtained by counting quadruples; the printed version of this
    // example differs at (4, 8), see the acceptance suite
    let m1 = [[18, 15, 11, 7, 4, 0], [15, 19, 15, 11, 8, 4], [11, 15, 18, 14, 11, 7], [7, 11, 14, 18, 15, 11]];
    let m4 = [[13, 11, 8, 5, 3, 0], [11, 14, 11, 8, 6, 3], [8, 11, 13, 10, 8, 5]];
    let a = pooling_matrix(1, &arch).unwrap();
    let b = pooling_matrix(4, &arch).unwrap();
    for (i, row) in m1.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            assert_eq!(a.counts.as_ref().unwrap()[i * 24 + j], c);
        }
    }
    for (i, row) in m4.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            assert_eq!(b.counts.as_ref().unwrap()[i * 24 + j], c);
        }
    }
    assert_eq!(a.counts.as_ref().unwrap()[3 * 24 + 7], 4);
    assert_eq!(a.prefactor, Some((3, 55)));
    assert_eq!(b.prefactor, Some((3, 40)));
    assert_eq!(a.rational(0, 0), Some((54, 55)));
}

#[test]
fn gram_is_psd_and_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let arch = ConvArchitecture::ck_ap(10, 4, 2).unwrap();
    let k = poly(&[0.0, 0.2, 0.2, 0.2, 0.2, 0.2], 4);
    let mut xs: Vec<BinarySignal> = (0..50).map(|_| BinarySignal::random(10, &mut rng)).collect();
    xs[7] = xs[3].clone();
    let g = gram_matrix(&arch, &k, &xs).unwrap();
    assert!(sym_eigenvalues(&g).unwrap()[0] >= -1e-10);
    for j in 0..50 {
        assert_eq!(g[(3, j)], g[(7, j)]);
        assert_eq!(g[(j, 3)], g[(3, j)]);
    }
    let one = gram_matrix(&arch, &k, &xs[..1]).unwrap();
    assert!((one[(0, 0)] - kernel_eval(&arch, &k, &xs[0], &xs[0]).unwrap()).abs() < 1e-15);
    let c = cross_gram(&arch, &k, &xs[..5], &xs).unwrap();
    assert_eq!((c.nrows(), c.ncols()), (5, 50));
    assert!((0..5).all(|i| (0..50).all(|j| c[(i, j)] == g[(i, j)])));
}

#[test]
fn mercer_expansion_reproduces_kernel() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let archs = [
        ConvArchitecture::ck(12, 4).unwrap(),
        ConvArchitecture::ck_ap(12, 4, 5).unwrap(),
        ConvArchitecture::ck_ap_ds(12, 4, 3, 3).unwrap(),
        ConvArchitecture::ck_ap_ds(12, 4, 4, 2).unwrap(),
        ConvArchitecture::ck_gp(12, 3).unwrap(),
        ConvArchitecture::weighted(12, 3, Filter::Gaussian { sigma: 2.0 }).unwrap(),
        ConvArchitecture::non_overlapping(12, 3, 6).unwrap(),
        ConvArchitecture::fc(10),
        ConvArchitecture::fc_gp(10),
    ];
    for arch in archs {
        let k = poly(&[0.05, 0.2, 0.3, 0.2, 0.15, 0.1], arch.q);
        let s = spectrum(&arch, &k).unwrap();
        for _ in 0..40 {
            let x = BinarySignal::random(arch.d, &mut rng);
            let y = BinarySignal::random(arch.d, &mut rng);
            let direct = kernel_eval(&arch, &k, &x, &y).unwrap();
            assert!((s.mercer_eval(&x, &y) - direct).abs() < 1e-10, "{arch}");
        }
    }
}

#[test]
fn mode_vectors_are_orthonormal() {
    let arch = ConvArchitecture::ck_ap_ds(12, 4, 4, 2).unwrap();
    let s = spectrum(&arch, &poly(&[0.0, 0.3, 0.3, 0.4], 4)).unwrap();
    let dense = |m: &Mode| -> Vec<f64> {
        let mut v = vec![0.0; s.classes[m.class].members.len()];
        for (p, c) in m.vector.entries() {
            v[p] = c;
        }
        v
    };
    for (i, a) in s.modes.iter().enumerate() {
        for b in &s.modes[i..] {
            if a.class != b.class {
                continue;
            }
            let ip: f64 = dense(a).iter().zip(dense(b)).map(|(x, y)| x * y).sum();
            let want = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
            assert!((ip - want).abs() < 1e-12);
        }
    }
    // sampled L2 check on two modes of one class
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (a, b) = (&s.modes[1], s.modes.iter().find(|m| m.class == s.modes[1].class && !std::ptr::eq(*m, &s.modes[1])).unwrap());
    let n = 200_000;
    let (mut aa, mut ab) = (0.0, 0.0);
    for _ in 0..n {
        let x = BinarySignal::random(12, &mut rng);
        let (va, vb) = (s.mode_value(a, &x), s.mode_value(b, &x));
        aa += va * va;
        ab += va * vb;
    }
    assert!((aa / n as f64 - 1.0).abs() < 0.05 && (ab / n as f64).abs() < 0.05);
}

#[test]
fn far_sets_are_in_the_null_space() {
    let (d, q) = (10, 3);
    let arch = ConvArchitecture::ck(d, q).unwrap();
    let k = poly(&[0.1, 0.3, 0.3, 0.3], q);
    let ev = KernelEvaluator::new(&arch, &k).unwrap();
    let cube: Vec<BinarySignal> = (0..1u64 << d).map(|b| BinarySignal::from_bits(d, b)).collect();
    let prepared = ev.prepare_all(&cube).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for members in [vec![0, 4], vec![1, 5, 6], vec![0, 3, 7]] {
        let s = IndexSet::new(members, d).unwrap();
        assert!(s.diameter().unwrap() > q);
        let ys: Vec<f64> = cube.iter().map(|y| parity_eval(&s, y).unwrap()).collect();
        for _ in 0..5 {
            let x = rng.random_range(0..cube.len());
            let v: f64 = (0..cube.len()).map(|y| ev.eval_prepared(&prepared[x], &prepared[y]) * ys[y]).sum::<f64>() / cube.len() as f64;
            assert!(v.abs() <= 1e-8);
        }
    }
}

#[test]
fn global_pooling_modes_are_cyclic_averages() {
    let (d, q) = (12, 4);
    let k = poly(&[0.0, 0.2, 0.2, 0.2, 0.2, 0.2], q);
    let s = spectrum(&ConvArchitecture::ck_gp(d, q).unwrap(), &k).unwrap();
    for m in &s.modes {
        let class = &s.classes[m.class];
        if class.degree == 0 {
            continue;
        }
        let r = q + 1 - class.diameter;
        assert!((m.lambda - k.xi()[class.degree] * r as f64).abs() < 1e-14);
        match &m.vector {
            ModeVector::Dense(v) => assert!(v.iter().all(|c| (c - 1.0 / (d as f64).sqrt()).abs() < 1e-12)),
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn spectrum_export_is_jsonl() {
    let s = spectrum(&ConvArchitecture::ck_ap(8, 3, 2).unwrap(), &poly(&[0.0, 1.0, 0.5], 3)).unwrap();
    let text = s.to_jsonl();
    let mut total = 0;
    let mut last = f64::INFINITY;
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let l = v["lambda"].as_f64().unwrap();
        assert!(l <= last);
        last = l;
        assert!(v["class"].as_array().unwrap().iter().all(|i| i.as_u64().unwrap() >= 1));
        total += v["multiplicity"].as_u64().unwrap() as usize;
    }
    assert_eq!(total, s.modes.len());
}
