use ::approx::assert_abs_diff_eq;
use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use super::*;
use crate::graph::{EdgeRecord, NodeRecord};

fn graph(id: &str, attrs: &[[f64; 2]], edges: &[(usize, usize)]) -> AttributedGraph {
    let nodes = attrs
        .iter()
        .enumerate()
        .map(|(i, a)| NodeRecord::new(format!("n{i}"), a.to_vec()))
        .collect();
    let edge_records = edges
        .iter()
        .map(|&(a, b)| EdgeRecord::new(format!("n{a}"), format!("n{b}"), vec![]))
        .collect();
    AttributedGraph::new(id, nodes, edge_records, false, 2, 0)
}

fn random_graph(rng: &mut ChaCha20Rng, id: &str, max_nodes: usize) -> AttributedGraph {
    let n = rng.random_range(0..=max_nodes);
    let attrs: Vec<[f64; 2]> = (0..n)
        .map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)])
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(0.4) {
                edges.push((i, j));
            }
        }
    }
    graph(id, &attrs, &edges)
}

#[test]
fn identical_graphs_have_zero_distance() {
    let g = graph(
        "g",
        &[[0.0, 0.0], [1.0, 0.0], [0.5, 1.0]],
        &[(0, 1), (1, 2)],
    );
    let cm = GedCostModel::default();
    let result = exact_ged(&g, &g, &cm, 1_000_000).unwrap();
    assert_eq!(result.distance, 0.0);
    assert!(result.exact);
    let path = result.edit_path.unwrap();
    assert!(path.iter().all(|op| op.cost() == 0.0));
    assert!(path.iter().all(|op| matches!(
        op,
        EditOp::SubstituteNode { .. } | EditOp::SubstituteEdge { .. }
    )));
}

#[test]
fn single_deletion_costs_one() {
    let g1 = graph("one", &[[0.0, 0.0]], &[]);
    let g2 = graph("empty", &[], &[]);
    let cm = GedCostModel::default();
    let result = exact_ged(&g1, &g2, &cm, 1_000).unwrap();
    assert_abs_diff_eq!(result.distance, 1.0, epsilon = 1e-12);
}

#[test]
fn approx_identical_graphs_zero() {
    // Two disjoint same-attribute edges admit a structure-breaking
    // zero-cost assignment; the induced path must still price to zero.
    let g = graph(
        "pairs",
        &[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
        &[(0, 1), (2, 3)],
    );
    let cm = GedCostModel::default();
    let result = approx_ged(&g, &g, &cm).unwrap();
    assert_eq!(result.distance, 0.0);
    assert!(!result.exact);
}

#[test]
fn approx_insertion_case() {
    // 1 node vs 3 isolated nodes: two insertions plus the cheapest
    // substitution, enumerated by hand over the 3 possible assignments.
    let g1 = graph("a", &[[0.0, 0.0]], &[]);
    let g2 = graph("b", &[[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]], &[]);
    let cm = GedCostModel::default();
    let best_subst = 1.0;
    let result = approx_ged(&g1, &g2, &cm).unwrap();
    assert_abs_diff_eq!(result.distance, 2.0 + best_subst, epsilon = 1e-12);
    let exact = exact_ged(&g1, &g2, &cm, 10_000).unwrap();
    assert_abs_diff_eq!(exact.distance, result.distance, epsilon = 1e-12);
}

#[test]
fn dispatch_follows_policy() {
    let small = graph(
        "s",
        &[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [3.0, 0.0]],
        &[(0, 1), (2, 3)],
    );
    let small2 = graph(
        "s2",
        &[[0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [3.0, 1.0]],
        &[(0, 1)],
    );
    let cm = GedCostModel::default();
    let policy = GedPolicy {
        exact_below_n_nodes: 10,
        budget: 1_000_000,
    };
    assert!(distance(&small, &small2, &cm, &policy).unwrap().exact);

    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let attrs: Vec<[f64; 2]> = (0..50).map(|_| [rng.random_range(0.0..1.0), 0.0]).collect();
    let big = graph("big", &attrs, &[(0, 1), (1, 2)]);
    let big2 = big.with_id("big2");
    assert!(!distance(&big, &big2, &cm, &policy).unwrap().exact);
}

#[test]
fn self_distance_zero_under_any_policy() {
    let cm = GedCostModel::default();
    let mut rng = ChaCha20Rng::seed_from_u64(17);
    for trial in 0..20 {
        let g = random_graph(&mut rng, &format!("g{trial}"), 6);
        for policy in [
            GedPolicy {
                exact_below_n_nodes: 10,
                budget: 1_000_000,
            },
            GedPolicy {
                exact_below_n_nodes: 0,
                budget: 1_000_000,
            },
        ] {
            let result = distance(&g, &g, &cm, &policy).unwrap();
            assert_eq!(result.distance, 0.0, "policy {policy:?}");
        }
    }
}

#[test]
fn budget_exhaustion_signals_and_dispatch_falls_back() {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let g1 = random_graph(&mut rng, "a", 8);
    let g2 = random_graph(&mut rng, "b", 8);
    let cm = GedCostModel::default();
    match exact_ged(&g1, &g2, &cm, 1) {
        Err(Error::BudgetExhausted { budget }) => assert_eq!(budget, 1),
        other => panic!("expected budget exhaustion, got {other:?}"),
    }
    let policy = GedPolicy {
        exact_below_n_nodes: 10,
        budget: 1,
    };
    let result = distance(&g1, &g2, &cm, &policy).unwrap();
    assert!(!result.exact);
}

#[test]
fn dimension_mismatch_rejected() {
    let g1 = graph("a", &[[0.0, 0.0]], &[]);
    let mut g2 = graph("b", &[[0.0, 0.0]], &[]);
    g2.node_attr_dim = 3;
    g2.nodes[0].attributes = vec![0.0, 0.0, 0.0];
    let cm = GedCostModel::default();
    assert!(exact_ged(&g1, &g2, &cm, 100).is_err());
    assert!(approx_ged(&g1, &g2, &cm).is_err());
}

#[test]
fn symmetry_with_symmetric_costs() {
    let cm = GedCostModel::default();
    let mut rng = ChaCha20Rng::seed_from_u64(23);
    for trial in 0..40 {
        let g1 = random_graph(&mut rng, &format!("a{trial}"), 5);
        let g2 = random_graph(&mut rng, &format!("b{trial}"), 5);
        let e12 = exact_ged(&g1, &g2, &cm, 1_000_000).unwrap().distance;
        let e21 = exact_ged(&g2, &g1, &cm, 1_000_000).unwrap().distance;
        assert!(e12 >= 0.0 && e21 >= 0.0);
        assert!((e12 - e21).abs() <= 1e-9, "exact asymmetry {e12} vs {e21}");
        let a12 = approx_ged(&g1, &g2, &cm).unwrap().distance;
        let a21 = approx_ged(&g2, &g1, &cm).unwrap().distance;
        assert!((a12 - a21).abs() <= 1e-9, "approx asymmetry {a12} vs {a21}");
    }
}

#[test]
fn approx_upper_bounds_exact() {
    let cm = GedCostModel::default();
    let mut rng = ChaCha20Rng::seed_from_u64(29);
    for trial in 0..60 {
        let g1 = random_graph(&mut rng, &format!("a{trial}"), 5);
        let g2 = random_graph(&mut rng, &format!("b{trial}"), 5);
        let exact = exact_ged(&g1, &g2, &cm, 1_000_000).unwrap().distance;
        let approx = approx_ged(&g1, &g2, &cm).unwrap().distance;
        assert!(
            approx >= exact - 1e-9,
            "approx {approx} below exact {exact}"
        );
    }
}

#[test]
fn astar_accumulation_matches_path_pricing() {
    let cm = GedCostModel::default();
    let mut rng = ChaCha20Rng::seed_from_u64(31);
    for trial in 0..40 {
        let g1 = random_graph(&mut rng, &format!("a{trial}"), 5);
        let g2 = random_graph(&mut rng, &format!("b{trial}"), 5);
        let result = exact_ged(&g1, &g2, &cm, 1_000_000).unwrap();
        let path_total: f64 = result.edit_path.unwrap().iter().map(|op| op.cost()).sum();
        assert!(
            (result.distance - path_total).abs() < 1e-9,
            "accumulated {} vs priced {}",
            result.distance,
            path_total
        );
    }
}

#[test]
fn root_heuristic_is_admissible() {
    let cm = GedCostModel::default();
    let mut rng = ChaCha20Rng::seed_from_u64(37);
    for trial in 0..60 {
        let g1 = random_graph(&mut rng, &format!("a{trial}"), 5);
        let g2 = random_graph(&mut rng, &format!("b{trial}"), 5);
        let h0 = exact::root_heuristic(&GraphView::new(&g1), &GraphView::new(&g2), &cm);
        let result = exact_ged(&g1, &g2, &cm, 1_000_000).unwrap();
        assert!(
            result.distance >= h0 - 1e-9,
            "distance {} below root heuristic {h0}",
            result.distance
        );
    }
}

#[test]
fn angle_metric_wraps_at_pi() {
    let cm = GedCostModel {
        edge_subst_metric: EdgeSubstMetric::AbsoluteAngleDifference,
        ..GedCostModel::default()
    };
    let pi = std::f64::consts::PI;
    assert_abs_diff_eq!(
        cm.edge_subst(&[0.1], &[2.0 * pi - 0.1]),
        0.2,
        epsilon = 1e-12
    );
    assert_abs_diff_eq!(cm.edge_subst(&[0.0], &[pi]), pi, epsilon = 1e-12);
    assert_eq!(cm.edge_subst(&[1.5], &[1.5]), 0.0);
}

#[test]
fn discrete_metrics_are_zero_on_equal_attributes() {
    let cm = GedCostModel {
        node_subst_metric: NodeSubstMetric::Discrete,
        edge_subst_metric: EdgeSubstMetric::Discrete,
        ..GedCostModel::default()
    };
    assert_eq!(cm.node_subst(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
    assert_eq!(cm.node_subst(&[1.0, 2.0], &[1.0, 2.5]), 1.0);
    assert_eq!(cm.edge_subst(&[3.0], &[3.0]), 0.0);
    assert_eq!(cm.edge_subst(&[3.0], &[4.0]), 1.0);
}

#[test]
fn pairwise_matrix_and_cache_behaviour() {
    let cm = GedCostModel::default();
    let policy = GedPolicy::default();
    let cache = DistanceCache::new(1000);

    let g = graph("g", &[[0.0, 0.0], [1.0, 0.0]], &[(0, 1)]);
    let matrix = pairwise_distances(&[&g], &cm, &policy, &cache).unwrap();
    assert_eq!(matrix.shape(), &[1, 1]);
    assert_eq!(matrix[(0, 0)], 0.0);

    let g_dup = g.clone();
    let h = graph(
        "h",
        &[[5.0, 5.0], [6.0, 5.0], [5.5, 6.0]],
        &[(0, 1), (1, 2)],
    );
    let matrix = pairwise_distances(&[&g, &g_dup, &h], &cm, &policy, &cache).unwrap();
    assert_eq!(matrix[(0, 1)], 0.0);
    assert_eq!(matrix[(1, 0)], 0.0);
    let dgh = distance(&g, &h, &cm, &policy).unwrap().distance;
    assert_abs_diff_eq!(matrix[(0, 2)], dgh, epsilon = 1e-12);
    assert_abs_diff_eq!(matrix[(1, 2)], dgh, epsilon = 1e-12);
    for i in 0..3 {
        assert_eq!(matrix[(i, i)], 0.0);
    }

    // A repeated call must be served entirely from the cache.
    let misses_before = cache.misses();
    let again = pairwise_distances(&[&g, &g_dup, &h], &cm, &policy, &cache).unwrap();
    assert_eq!(matrix, again);
    assert_eq!(cache.misses(), misses_before);
    assert!(cache.hits() > 0);
}

#[test]
fn cache_capacity_is_bounded() {
    let cache = DistanceCache::new(4);
    for i in 0..20 {
        cache.insert((format!("a{i}"), format!("b{i}"), 0), i as f64);
    }
    assert!(cache.len() <= 4);
    // The most recently inserted key must survive.
    assert_eq!(cache.get(&("a19".into(), "b19".into(), 0)), Some(19.0));
}

#[test]
fn cost_model_fingerprint_distinguishes_models() {
    let a = GedCostModel::default();
    let b = GedCostModel {
        node_delete_cost: 2.0,
        ..GedCostModel::default()
    };
    assert_ne!(a.fingerprint(), b.fingerprint());
    assert_eq!(a.fingerprint(), GedCostModel::default().fingerprint());
}

#[test]
fn invalid_cost_model_rejected() {
    let cm = GedCostModel {
        node_insert_cost: -1.0,
        ..GedCostModel::default()
    };
    assert!(cm.validate().is_err());
    let cm = GedCostModel {
        edge_delete_cost: f64::NAN,
        ..GedCostModel::default()
    };
    assert!(cm.validate().is_err());
}

#[test]
fn directed_vs_undirected_rejected() {
    let g1 = graph("a", &[[0.0, 0.0], [1.0, 0.0]], &[(0, 1)]);
    let mut g2 = g1.with_id("b");
    g2.directed = true;
    let cm = GedCostModel::default();
    assert!(distance(&g1, &g2, &cm, &GedPolicy::default()).is_err());
}

#[test]
fn directed_edges_priced_per_direction() {
    // Same node sets; g1 has a->b, g2 has b->a. One deletion plus one
    // insertion under the default model.
    let nodes = vec![
        NodeRecord::new("a", vec![0.0, 0.0]),
        NodeRecord::new("b", vec![1.0, 0.0]),
    ];
    let g1 = AttributedGraph::new(
        "d1",
        nodes.clone(),
        vec![EdgeRecord::new("a", "b", vec![])],
        true,
        2,
        0,
    );
    let g2 = AttributedGraph::new(
        "d2",
        nodes,
        vec![EdgeRecord::new("b", "a", vec![])],
        true,
        2,
        0,
    );
    let cm = GedCostModel::default();
    let result = exact_ged(&g1, &g2, &cm, 100_000).unwrap();
    assert_abs_diff_eq!(result.distance, 2.0, epsilon = 1e-12);
}
