use harness_cli::{build_target, geometric_grid, ExperimentConfig, TargetSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geometric_grid_is_strictly_increasing(lo in 1usize..50, span in 2usize..5000, count in 2usize..20) {
        let hi = lo + span;
        let g = geometric_grid(lo, hi, count);
        prop_assert_eq!(g[0], lo);
        prop_assert_eq!(*g.last().unwrap(), hi);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(g.len() <= count);
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), seeds in 1usize..10, n0 in 1usize..100, lambda in 0.0f64..10.0) {
        let cfg = ExperimentConfig { master_seed: seed, seeds, n_grid: vec![n0, n0 + 1, 2 * n0 + 5], lambda, ..ExperimentConfig::paper_figure_1() };
        let back: ExperimentConfig = toml::from_str(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn chain_targets_have_unit_norm(half in 3usize..12, l in 1usize..4) {
        let d = 2 * half;
        for spec in [TargetSpec::LfChain { l }, TargetSpec::HfChain { l }] {
            let t = build_target(&spec, d).unwrap();
            prop_assert!((t.norm_sq() - 1.0).abs() < 1e-12);
            prop_assert!(t.coeffs().keys().all(|s| s.len() == l));
        }
    }
}
