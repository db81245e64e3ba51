use std::collections::BTreeMap;

use exclusivity::graphs::{
    find_vertex_event_mapping_pinned, is_isomorphism, orthogonality_graph, theta_lower_bound,
    verify_orthonormal_representation,
};
use exclusivity::paradox::{contextual_chsh_paradox_spec, verify, DEFAULT_TOL};
use exclusivity::quantum::*;
use exclusivity::scenario::{chsh_event_graph, Event};
use exclusivity::vector::{Rational, SqrtRational};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

#[test]
fn mapping_constant_is_the_pinned_isomorphism() {
    let (_, vs) = construction_vectors();
    let by_label: BTreeMap<usize, StateVector> = vs.into_iter().enumerate().map(|(k, v)| (k + 1, v)).collect();
    let ortho = orthogonality_graph(&by_label).unwrap();
    assert_eq!(ortho.size(), 12);
    let target = chsh_event_graph();
    let id = |s: &str| target.find_event(&s.parse().unwrap()).unwrap();
    let found = find_vertex_event_mapping_pinned(&ortho, &target, &[(1, id("01|00")), (8, id("01|10"))]).unwrap();
    let stored: BTreeMap<usize, usize> = CONSTRUCTION_EVENTS.iter().enumerate().map(|(k, e)| (k + 1, id(e))).collect();
    assert!(is_isomorphism(&ortho, &target, &stored));
    assert_eq!(found, stored);
}

#[test]
fn orthogonal_pairs_are_exactly_the_twelve_edges() {
    let (_, vs) = construction_vectors();
    let pairs = [(1, 2), (1, 5), (1, 7), (2, 3), (2, 4), (3, 6), (3, 8), (4, 5), (4, 6), (5, 8), (6, 7), (7, 8)];
    for i in 1..=8usize {
        for j in i + 1..=8 {
            let o = vs[i - 1].overlap_sq(&vs[j - 1]).unwrap().exact.unwrap();
            assert_eq!(o == r(0, 1), pairs.contains(&(i, j)), "({i},{j})");
        }
    }
}

#[test]
fn representation_is_exact_and_valid() {
    let m = chsh_construction();
    let rep = m.representation();
    let report = verify_orthonormal_representation(m.graph(), &rep).unwrap();
    assert!(report.is_valid() && report.exact);
    assert_eq!(theta_lower_bound(m.graph(), &rep).unwrap().exact, Some(r(19, 6)));
}

#[test]
fn vertex_probabilities_are_exact() {
    let m = chsh_construction();
    let p = model_vertex_probabilities(&m);
    let expected = [r(1, 12), r(1, 2), r(1, 2), r(1, 3), r(2, 3), r(1, 3), r(2, 3), r(1, 12)];
    for (k, e) in expected.iter().enumerate() {
        let v = m.vertex_with_label(k + 1).unwrap();
        assert_eq!(p[&v].exact, Some(*e), "v{}", k + 1);
    }
}

#[test]
fn float_path_agrees_with_exact_path() {
    let m = chsh_construction();
    let floats: BTreeMap<_, _> =
        m.graph().vertex_ids().map(|v| (v, StateVector::float(m.vector(v).unwrap().amplitudes()).unwrap())).collect();
    let handle = StateVector::float(m.handle().amplitudes()).unwrap();
    let fm = QuantumContextModel::new(m.graph().clone(), floats, handle).unwrap();
    let exact = model_vertex_probabilities(&m);
    for (v, p) in model_vertex_probabilities(&fm) {
        assert!(p.exact.is_none());
        assert!((p.value - exact[&v].value).abs() < 1e-12);
    }
}

#[test]
fn decompositions_of_the_handle() {
    let m = chsh_construction();
    let v = |k| m.vertex_with_label(k).unwrap();
    let half = SqrtRational::sqrt_of(1, 2);
    let (a, b) = (SqrtRational::sqrt_of(1, 3), SqrtRational::sqrt_of(2, 3));
    assert!(verify_state_decomposition(&m, (v(2), v(3)), (half, half)).unwrap());
    assert!(verify_state_decomposition(&m, (v(4), v(5)), (a, b)).unwrap());
    assert!(verify_state_decomposition(&m, (v(6), v(7)), (a, b)).unwrap());
    assert!(!verify_state_decomposition(&m, (v(4), v(5)), (b, a)).unwrap());
    assert!(matches!(verify_state_decomposition(&m, (99, v(5)), (a, b)), Err(QuantumError::UnknownVertex(99))));
}

#[test]
fn contextual_behavior_verifies_the_paradox() {
    let m = chsh_construction();
    let report = verify(&m.contextual_behavior(), &contextual_chsh_paradox_spec(), DEFAULT_TOL).unwrap();
    assert!(report.verified);
    assert!((report.p_hardy - 1.0 / 6.0).abs() < 1e-12);
}

#[test]
fn model_rejects_non_orthogonal_vectors() {
    let m = chsh_construction();
    let mut vectors: BTreeMap<_, _> = m.graph().vertex_ids().map(|v| (v, m.vector(v).unwrap().clone())).collect();
    let first = *vectors.keys().next().unwrap();
    vectors.insert(first, m.handle().clone());
    let err = QuantumContextModel::new(m.graph().clone(), vectors, m.handle().clone()).unwrap_err();
    assert!(matches!(err, QuantumError::InvalidModel(_)));
}

#[test]
fn model_json_round_trip() {
    let m = chsh_construction();
    let json = serde_json::to_string(&m).unwrap();
    let back: QuantumContextModel = serde_json::from_str(&json).unwrap();
    assert_eq!(back, m);
}

#[test]
fn saturation_covers_in_the_bell_scenario() {
    let s = exclusivity::Scenario::bell_222();
    let ev = |xs: &[&str]| xs.iter().map(|x| x.parse().unwrap()).collect::<Vec<Event>>();
    assert!(ep_cover_check(&ev(&["11|00", "00|01", "10|00", "01|01"]), &s));
    assert!(ep_cover_check(&ev(&["00|01", "01|11", "10|01", "11|11"]), &s));
    assert!(ep_cover_check(&ev(&["11|10", "01|11", "00|11", "10|10"]), &s));
    assert!(!ep_cover_check(&ev(&["11|10", "01|11", "00|11", "01|10"]), &s));
}
