use std::collections::BTreeMap;

use exclusivity::graphs::*;
use exclusivity::scenario::{build_exclusivity_graph, chsh_event_graph, ExclusivityGraph, Scenario};

const ACC: f64 = 1e-7;

fn theta(g: &ExclusivityGraph) -> f64 {
    lovasz_theta(g, ACC).unwrap().value
}

#[test]
fn theta_of_pentagon_is_sqrt5() {
    assert!((theta(&ExclusivityGraph::cycle(5)) - 5f64.sqrt()).abs() < 1e-6);
}

#[test]
fn theta_of_complete_and_edgeless_graphs() {
    for n in 1..=6 {
        assert!((theta(&ExclusivityGraph::complete(n)) - 1.0).abs() < 1e-6, "K{n}");
        assert!((theta(&ExclusivityGraph::edgeless(n)) - n as f64).abs() < 1e-6, "E{n}");
    }
}

#[test]
fn theta_of_odd_cycles_matches_closed_form() {
    // ϑ(C_n) = n cos(π/n) / (1 + cos(π/n)) for odd n
    for n in [5usize, 7, 9, 11] {
        let c = (std::f64::consts::PI / n as f64).cos();
        let expected = n as f64 * c / (1.0 + c);
        assert!((theta(&ExclusivityGraph::cycle(n)) - expected).abs() < 1e-6, "C{n}");
    }
}

#[test]
fn theta_of_chsh_graph() {
    assert!((theta(&chsh_event_graph()) - (2.0 + 2f64.sqrt())).abs() < 1e-6);
}

#[test]
fn weighted_theta_of_edgeless_graph_is_weight_sum() {
    let w: BTreeMap<_, _> = [(0, 0.5), (1, 2.0), (2, 1.25)].into_iter().collect();
    let g = ExclusivityGraph::edgeless(3).with_weights(&w).unwrap();
    assert!((theta(&g) - 3.75).abs() < 1e-6);
    assert_eq!(weighted_independence_number(&g).unwrap().0, 3.75);
}

#[test]
fn certificate_is_feasible_and_attains_lower_bound() {
    for g in [ExclusivityGraph::cycle(5), chsh_event_graph(), ExclusivityGraph::cycle(7)] {
        let r = lovasz_theta(&g, ACC).unwrap();
        let x = r.certificate();
        assert!((x.trace() - 1.0).abs() < 1e-9);
        for &(a, b) in g.edges() {
            let (i, j) = (g.position(a).unwrap(), g.position(b).unwrap());
            assert!(x[(i, j)].abs() < 1e-9);
        }
        let min_eig = x.clone().symmetric_eigen().eigenvalues.min();
        assert!(min_eig > -1e-9, "{min_eig}");
        let total: f64 = x.iter().sum();
        assert!((total - r.lower).abs() < 1e-9);
        assert!(r.lower <= r.upper + 1e-12 && r.duality_gap <= ACC);
    }
}

#[test]
fn theta_dominates_alpha_on_the_2_2_2_graph() {
    let g = build_exclusivity_graph(&Scenario::bell_222());
    let (alpha, _) = independence_number(&g).unwrap();
    let r = lovasz_theta(&g, ACC).unwrap();
    assert_eq!(alpha, 4);
    assert!(alpha as f64 <= r.value + r.duality_gap);
}

#[test]
fn theta_rejects_bad_inputs() {
    assert!(matches!(lovasz_theta(&ExclusivityGraph::cycle(5), 1e-9), Err(GraphError::InvalidAccuracy(_))));
    assert!(matches!(lovasz_theta(&ExclusivityGraph::cycle(17), ACC), Err(GraphError::TooLarge { .. })));
}

#[test]
fn theta_is_invariant_under_relabelling() {
    let g = chsh_event_graph();
    let map: BTreeMap<_, _> = g.vertex_ids().map(|v| (v, 100 - v)).collect();
    let h = g.relabel(&map).unwrap();
    assert!((theta(&g) - theta(&h)).abs() < 1e-6);
    assert_eq!(independence_number(&g).unwrap().0, independence_number(&h).unwrap().0);
}

#[test]
fn perfect_graphs_have_no_small_odd_holes_and_theta_equals_alpha() {
    // C6 is bipartite, hence perfect
    let c6 = ExclusivityGraph::cycle(6);
    assert!(find_odd_holes(&c6, 5).unwrap().is_empty());
    assert!((theta(&c6) - 3.0).abs() < 1e-6);
}
