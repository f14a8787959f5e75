mod common;

use cclab::metrics::spectral::{fiedler_value, WeightedGraph};
use cclab::metrics::{check_assumptions, classification_error, clustering_cost, core_structure, structural_stats};
use cclab::{sdp, Clustering, SolverOptions};
use proptest::prelude::*;

fn labels_strategy(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cost_matches_per_cluster_aggregation(n in 1usize..9, seed in 0u64..10_000, raw in labels_strategy(8, 5)) {
        let inst = common::random_instance(n, 0.7, false, seed);
        let c = Clustering::from_raw(&raw[..n]);
        let a = clustering_cost(&inst, &c).unwrap();
        let b = common::cost_by_cluster(&inst, &c);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((a - common::cost_of_labels(&inst, c.labels())).abs() < 1e-12);
    }

    #[test]
    fn matching_equals_brute_force(n in 1usize..11, p in labels_strategy(10, 4), f in labels_strategy(10, 6)) {
        let planted = Clustering::from_raw(&p[..n]);
        let found = Clustering::from_raw(&f[..n]);
        let r = classification_error(&planted, &found).unwrap();
        prop_assert_eq!(r.matched_overlap, common::brute_matching(&planted, &found));
        prop_assert_eq!(r.misclassified, n - r.matched_overlap);
        // Roles swapped.
        let back = classification_error(&found, &planted).unwrap();
        prop_assert_eq!(back.matched_overlap, r.matched_overlap);
    }

    #[test]
    fn matching_is_permutation_invariant(n in 1usize..11, p in labels_strategy(10, 4), f in labels_strategy(10, 4), shift in 0usize..4) {
        let planted = Clustering::from_raw(&p[..n]);
        let found = Clustering::from_raw(&f[..n]);
        let base = classification_error(&planted, &found).unwrap();
        // Relabel the found clusters by a cyclic shift of the ids.
        let k = found.k();
        let permuted: Vec<usize> = found.labels().iter().map(|&l| (l + shift) % k).collect();
        let permuted = Clustering::new(permuted).unwrap();
        let r = classification_error(&planted, &permuted).unwrap();
        prop_assert_eq!(r.matched_overlap, base.matched_overlap);
        prop_assert_eq!(classification_error(&planted, &planted).unwrap().error, 0.0);
    }
}

#[test]
fn complete_graph_fiedler_closed_form() {
    for m in 2..=12 {
        let mut g = WeightedGraph::new(m);
        for u in 0..m {
            for v in u + 1..m {
                g.add_edge(u, v, 1.0);
            }
        }
        let want = m as f64 / (m as f64 - 1.0);
        assert!((fiedler_value(&g) - want).abs() < 1e-9, "m = {m}");
    }
}

#[test]
fn lanczos_agrees_with_closed_form_on_large_complete_graph() {
    let m = 90;
    let mut g = WeightedGraph::new(m);
    for u in 0..m {
        for v in u + 1..m {
            g.add_edge(u, v, 1.0);
        }
    }
    assert!((fiedler_value(&g) - m as f64 / (m as f64 - 1.0)).abs() < 1e-6);
}

#[test]
fn beta_near_quarter_for_four_clusters() {
    let (inst, truth) = cclab::instance::generate_gnp_planted(1000, 0.15, 4, 0.2, 3).unwrap();
    let report = check_assumptions(&inst, &truth).unwrap();
    // Within-cluster pair fraction 4 * C(250, 2) / C(1000, 2).
    let expected = 4.0 * (250.0 * 249.0 / 2.0) / (1000.0 * 999.0 / 2.0);
    assert!((report.beta - expected).abs() <= 0.02);
    assert!((report.beta - 0.25).abs() <= 0.02);
    assert!(report.lambda_gap > 0.5);
}

#[test]
fn structural_identities_and_flip_bound() {
    for seed in 1..=3 {
        let (inst, truth) = cclab::instance::generate_gnp_planted(150, 0.25, 3, 0.2, seed).unwrap();
        let sol = sdp::solve(&inst, &SolverOptions::with_seed(seed)).unwrap();
        for delta in [0.05, 0.25, 0.45] {
            let st = structural_stats(&inst, &truth, &sol, Some(delta)).unwrap();
            assert!(st.flip_bound_holds());
            assert!(st.e_flip_cost <= sol.objective / (1.0 - delta));
            let q_cost: f64 = truth.q_edges(&inst).iter().map(|&i| inst.edges()[i].cost).sum();
            assert!((st.q_cost - q_cost).abs() < 1e-9);
            assert!(st.q_surviving_cost <= st.q_cost);
            assert!((st.sigma - 6.0 * delta / 0.6).abs() < 1e-12);
        }
    }
}

#[test]
fn integral_planted_embedding_has_perfect_cores() {
    let (inst, truth) = cclab::instance::generate_gnp_planted(60, 0.4, 3, 0.1, 2).unwrap();
    let emb = sdp::embed_clustering(&inst, &truth.planted, 3).unwrap();
    let report = core_structure(&emb, &truth, 0.1, 0.8).unwrap();
    assert_eq!(report.min_core_fraction, 1.0);
    assert!((report.min_center_distance.unwrap() - 2f64.sqrt()).abs() < 1e-12);
}
