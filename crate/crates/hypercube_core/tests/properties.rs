use hypercube_core::{parity_bits, parity_eval, BinarySignal, IndexSet};
use itertools::Itertools;
use proptest::prelude::*;

fn signal(d: usize) -> impl Strategy<Value = BinarySignal> {
    proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], d).prop_map(|v| BinarySignal::new(v).unwrap())
}

fn subset(d: usize) -> impl Strategy<Value = IndexSet> {
    proptest::collection::btree_set(0..d, 0..=d).prop_map(move |s| IndexSet::new(s.into_iter().collect(), d).unwrap())
}

proptest! {
    #[test]
    fn shift_then_patch_is_offset_patch(x in signal(12), k in 0usize..12, m in 0usize..24, q in 1usize..=12) {
        prop_assert_eq!(x.shift(m).patch(k, q).unwrap(), x.patch(k + m, q).unwrap());
    }

    #[test]
    fn parity_is_multiplicative(x in signal(9), s in subset(9), i in 0usize..9) {
        let lhs = parity_eval(&s, &x).unwrap() * x.get(i) as f64;
        prop_assert_eq!(lhs, parity_eval(&s.toggle(i), &x).unwrap());
    }

    #[test]
    fn mask_path_agrees(x in signal(20), s in subset(20)) {
        prop_assert_eq!(parity_bits(s.mask().unwrap(), x.neg_mask().unwrap()), parity_eval(&s, &x).unwrap());
    }

    #[test]
    fn translate_preserves_diameter(s in subset(15), k in 0usize..15) {
        prop_assume!(!s.is_empty());
        prop_assert_eq!(s.translate(k).diameter().unwrap(), s.diameter().unwrap());
    }
}

#[test]
fn parity_examples() {
    let x: BinarySignal = "--+++".parse().unwrap();
    assert_eq!(parity_eval(&IndexSet::empty(5), &x).unwrap(), 1.0);
    assert_eq!(parity_eval(&IndexSet::from_one_based(&[1, 2], 5).unwrap(), &x).unwrap(), 1.0);
    assert!(parity_eval(&IndexSet::empty(4), &x).is_err());
}

#[test]
fn parities_are_orthonormal_on_q6() {
    let d = 6;
    let points: Vec<BinarySignal> = (0..1u64 << d).map(|b| BinarySignal::from_bits(d, b)).collect();
    let sets: Vec<IndexSet> = (0..=d).flat_map(|l| (0..d).combinations(l)).map(|m| IndexSet::new(m, d).unwrap()).collect();
    assert_eq!(sets.len(), 64);
    for a in &sets {
        for b in &sets {
            let mean: f64 = points.iter().map(|x| parity_eval(a, x).unwrap() * parity_eval(b, x).unwrap()).sum::<f64>() / points.len() as f64;
            assert_eq!(mean, if a == b { 1.0 } else { 0.0 });
        }
    }
}
