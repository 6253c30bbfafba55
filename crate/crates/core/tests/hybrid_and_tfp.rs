use rademine_core::bounds::{sd_bound_thm33, BoundParams};
use rademine_core::hybrid::{beta_for_node_budget, hybrid_sd_bound, HybridConfig};
use rademine_core::oracle::{check_no_false_positives, GroundTruth};
use rademine_core::tfp::{tfp_baseline_massart, tfp_r, TfpConfig};
use rademine_core::{get_n_mcera, EngineConfig, RademacherMatrix, SampleDataset};

use proptest::prelude::*;

fn dataset() -> impl Strategy<Value = SampleDataset> {
    proptest::collection::vec(proptest::collection::vec(0u32..8, 0..6), 1..25).prop_map(SampleDataset::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hybrid_dominates_explored_part(ds in dataset(), n in 1usize..4, seed in any::<u64>(), beta in 0.0f64..1.0) {
        let mat = RademacherMatrix::draw(ds.m(), n, seed).unwrap();
        let mut cfg = HybridConfig::with_beta(beta, 0.01, 0.1).unwrap();
        cfg.centralize = false;
        let rep = hybrid_sd_bound(&ds, &mat, &cfg).unwrap();
        let h = rep.hybrid.clone().unwrap();
        let over_g = get_n_mcera(&ds, &mat, &EngineConfig { beta_floor: Some(beta), ..Default::default() }).unwrap();
        let exact = get_n_mcera(&ds, &mat, &EngineConfig::default()).unwrap();
        for (v, nu) in h.per_row_value.iter().zip(&over_g.nu_raw) {
            prop_assert!(*v >= *nu as f64 / ds.m() as f64);
        }
        prop_assert!(h.nodes_explored <= exact.nodes_explored);
        prop_assert!((rep.terms_sum() - rep.epsilon).abs() <= 1e-12 * rep.epsilon.max(1.0));
    }

    #[test]
    fn node_budget_is_respected(ds in dataset(), k in 1usize..40, seed in any::<u64>()) {
        let mat = RademacherMatrix::draw(ds.m(), 2, seed).unwrap();
        let rep = hybrid_sd_bound(&ds, &mat, &HybridConfig::with_max_nodes(k, 0.01, 0.1).unwrap()).unwrap();
        let h = rep.hybrid.unwrap();
        prop_assert!(h.nodes_explored <= k);
        prop_assert_eq!(h.beta_effective, beta_for_node_budget(&ds, k));
    }

    #[test]
    fn tfp_trace_is_non_increasing(ds in dataset(), theta in 0.0f64..1.0, seed in any::<u64>()) {
        let res = tfp_r(&ds, &TfpConfig::new(theta, 0.1, 3, seed).unwrap()).unwrap();
        prop_assert!(res.epsilon_trace.windows(2).all(|w| w[1] <= w[0]));
        for p in &res.patterns {
            prop_assert!(p.frequency >= res.final_threshold);
        }
    }
}

#[test]
fn hybrid_converges_to_exact_path() {
    let ds = SampleDataset::new(vec![vec![1, 2, 3], vec![1, 2], vec![1], vec![2, 3], vec![3, 4], vec![1, 4]]);
    let mat = RademacherMatrix::draw(ds.m(), 5, 17).unwrap();
    let exact = get_n_mcera(&ds, &mat, &EngineConfig::default()).unwrap();
    let target = sd_bound_thm33(exact.centralized_mcera, &BoundParams::binary(ds.m(), 5, 0.1, true).unwrap()).epsilon;
    let mut last_gap = f64::INFINITY;
    for e in 2..=9 {
        let small = 10f64.powi(-e);
        let cfg = HybridConfig::with_beta(small * small, small, 0.1).unwrap();
        let eps = hybrid_sd_bound(&ds, &mat, &cfg).unwrap().epsilon;
        let gap = eps - target;
        assert!(gap >= -1e-12);
        assert!(gap <= last_gap + 1e-12);
        last_gap = gap;
    }
    assert!(last_gap < 1e-6, "{last_gap}");
}

#[test]
fn bernoulli_generator_has_no_false_positives() {
    let truth = GroundTruth::bernoulli(vec![(1, 0.9), (2, 0.1)], 0.5).unwrap();
    for seed in 0..5 {
        let ds = truth.sample(10_000, seed).unwrap();
        let cfg = TfpConfig::new(0.5, 0.1, 10, seed + 100).unwrap();
        let res = tfp_r(&ds, &cfg).unwrap();
        assert!(check_no_false_positives(&res, &truth));
        assert!(res.contains(&[1]) && !res.contains(&[2]));
        let base = tfp_baseline_massart(&ds, &cfg).unwrap();
        assert!(base.epsilon_trace[0] >= res.epsilon_trace[res.iterations - 1]);
        assert!(base.patterns.iter().all(|p| res.contains(p.pattern.items())));
    }
}
