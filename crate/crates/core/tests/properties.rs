use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use exclusivity::behavior::Behavior;
use exclusivity::graphs::{independence_number, lovasz_theta};
use exclusivity::inequalities::{correlator_inequality_value, correlator_sum_exact, s_chsh};
use exclusivity::paradox::{chsh_paradox_spec, verify};
use exclusivity::quantum::*;
use exclusivity::scenario::*;
use exclusivity::vector::Rational;

fn bell_event() -> impl Strategy<Value = Event> {
    (0u8..2, 0u8..2, 0u8..2, 0u8..2).prop_map(|(a, b, x, y)| Event::bell(a, b, x, y))
}

fn any_event() -> impl Strategy<Value = Event> {
    prop_oneof![bell_event(), (0u8..2, 0usize..2).prop_map(|(o, k)| Event::atomic(o, k))]
}

fn angles() -> impl Strategy<Value = BlochAngles> {
    (0.0..PI, 0.0..TAU).prop_map(|(theta, phi)| BlochAngles { theta, phi })
}

/// Arbitrary two-qubit model: no gauge fixing.
fn bell_model() -> impl Strategy<Value = BellLocalModel> {
    (
        prop::array::uniform4(0.0f64..1.0),
        prop::array::uniform3(0.0..TAU),
        prop::array::uniform2(angles()),
        prop::array::uniform2(angles()),
    )
        .prop_filter_map("zero state", |(amps, phases, alice, bob)| {
            let n = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
            (n > 1e-3).then(|| BellLocalModel::new(amps.map(|a| a / n), phases, alice, bob).unwrap())
        })
}

fn random_graph(max_n: usize) -> impl Strategy<Value = ExclusivityGraph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            ExclusivityGraph::from_edges(n, edges).unwrap()
        })
    })
}

/// All four-event exclusive covers of the 2-2-2 scenario.
fn bell_covers() -> Vec<Vec<Event>> {
    let s = Scenario::bell_222();
    let events = enumerate_events(&s);
    let mut covers = Vec::new();
    for a in 0..16 {
        for b in a + 1..16 {
            for c in b + 1..16 {
                for d in c + 1..16 {
                    let set = vec![events[a].clone(), events[b].clone(), events[c].clone(), events[d].clone()];
                    if ep_cover_check(&set, &s) {
                        covers.push(set);
                    }
                }
            }
        }
    }
    covers
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn exclusivity_is_symmetric_and_irreflexive(e in any_event(), f in any_event()) {
        prop_assert!(!are_exclusive(&e, &e));
        prop_assert_eq!(are_exclusive(&e, &f), are_exclusive(&f, &e));
    }

    #[test]
    fn local_behaviors_are_no_signaling(m in bell_model()) {
        let b = bell_local_behavior(&m);
        for x in 0..2u8 {
            for a in 0..2u8 {
                let e = Event::atomic(a, x as usize);
                let via0 = b.marginal_in(&e, &[format!("A{x}"), "B0".into()]).unwrap();
                let via1 = b.marginal_in(&e, &[format!("A{x}"), "B1".into()]).unwrap();
                prop_assert!((via0 - via1).abs() < 1e-9);
            }
        }
        for y in 0..2u8 {
            for o in 0..2u8 {
                let e = Event::new([(format!("B{y}"), o)]).unwrap();
                let via0 = b.marginal_in(&e, &["A0".into(), format!("B{y}")]).unwrap();
                let via1 = b.marginal_in(&e, &["A1".into(), format!("B{y}")]).unwrap();
                prop_assert!((via0 - via1).abs() < 1e-9);
                // p(o|B_y) = p(0,o|x,y) + p(1,o|x,y) equals the direct Born rule on Bob's side
                let direct: f64 = (0..2).map(|a| m.probability(a, o, 0, y)).sum();
                prop_assert!((via0 - direct).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn exclusive_events_have_orthogonal_projectors(m in bell_model(), e in bell_event(), f in bell_event()) {
        if are_exclusive(&e, &f) {
            let (a, b, x, y) = e.as_bell().unwrap();
            let (c, d, s, t) = f.as_bell().unwrap();
            let u = m.event_vector(a, b, x, y);
            let v = m.event_vector(c, d, s, t);
            let ip: Complex64 = u.iter().zip(&v).map(|(p, q)| p.conj() * q).sum();
            prop_assert!(ip.norm() < 1e-12);
        }
    }

    #[test]
    fn gauge_fixing_preserves_statistics(m in bell_model()) {
        let g = m.gauge_fixed();
        for e in enumerate_events(&Scenario::bell_222()) {
            let (a, b, x, y) = e.as_bell().unwrap();
            prop_assert!((m.probability(a, b, x, y) - g.probability(a, b, x, y)).abs() < 1e-10);
        }
    }

    #[test]
    fn relabelling_preserves_alpha(g in random_graph(10), shift in 0usize..50) {
        let n = g.order();
        let map: BTreeMap<_, _> = g.vertex_ids().map(|v| (v, (n - 1 - v + shift) % n + 100)).collect();
        let h = g.relabel(&map).unwrap();
        prop_assert_eq!(h.size(), g.size());
        prop_assert_eq!(independence_number(&g).unwrap().0, independence_number(&h).unwrap().0);
    }

    #[test]
    fn chsh_sum_is_three_plus_hardy_under_saturation(
        s in prop::array::uniform3(0.0f64..1.0),
        splits in prop::array::uniform4(prop::array::uniform2(0.0f64..1.0)),
    ) {
        let mut s = s;
        s.sort_by(|a, b| b.total_cmp(a));
        let [s1, s2, s3] = s;
        // mass left over in each context, split at random among its other events
        let share = |mass: f64, k: usize| {
            let [u, v] = splits[k];
            let (lo, hi) = (u.min(v), u.max(v));
            [mass * lo, mass * (hi - lo), mass * (1.0 - hi)]
        };
        let mut p: BTreeMap<Event, f64> = BTreeMap::new();
        let mut put = |e: &str, v: f64| { p.insert(e.parse().unwrap(), v); };
        let c00 = share(1.0 - s1, 0);
        put("10|00", s1); put("00|00", c00[0]); put("01|00", c00[1]); put("11|00", c00[2]);
        let c01 = share(s1 - s2, 1);
        put("01|01", 1.0 - s1); put("10|01", s2); put("00|01", c01[0]); put("11|01", c01[1] + c01[2]);
        let c11 = share(s2 - s3, 2);
        put("11|11", 1.0 - s2); put("00|11", s3); put("01|11", c11[0]); put("10|11", c11[1] + c11[2]);
        let c10 = share(s3, 3);
        put("10|10", 1.0 - s3); put("00|10", c10[0]); put("01|10", c10[1]); put("11|10", c10[2]);
        let b = Behavior::new(Scenario::bell_222(), p).unwrap();
        let r = verify(&b, &chsh_paradox_spec(), 1.0).unwrap();
        prop_assert!((s_chsh(&b).unwrap() - (3.0 + r.p_hardy)).abs() < 1e-12);
    }

    #[test]
    fn correlator_identity_is_exact(nums in prop::collection::vec(0i64..=1000, 8)) {
        let g = chsh_event_graph();
        let probs: BTreeMap<_, _> = g.vertex_ids().zip(&nums).map(|(v, &n)| (v, Rational::new(n, 1000))).collect();
        let (sum, closed) = correlator_sum_exact(&probs, &g).unwrap();
        prop_assert_eq!(Some(sum), closed);
    }

    #[test]
    fn saturating_assignments_violate_the_correlator_bound(
        pairs in prop::array::uniform3(0.0f64..=1.0),
        p1 in 0.0f64..0.5,
        p8 in 0.0f64..0.5,
    ) {
        prop_assume!(p1 + p8 > 1e-9);
        let m = chsh_construction();
        let label = |k| m.vertex_with_label(k).unwrap();
        let mut probs = BTreeMap::new();
        probs.insert(label(1), p1);
        probs.insert(label(8), p8);
        for (k, q) in pairs.iter().enumerate() {
            probs.insert(label(2 * k + 2), *q);
            probs.insert(label(2 * k + 3), 1.0 - q);
        }
        let r = correlator_inequality_value(&probs, m.graph()).unwrap();
        prop_assert!(r.value < -6.0);
        prop_assert!(r.violated);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exclusive_covers_sum_to_one(m in bell_model()) {
        let b = bell_local_behavior(&m);
        for cover in bell_covers() {
            let total = b.sum_of(&cover).unwrap();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quantum_models_respect_the_theta_bound(
        entries in prop::collection::vec(-1.0f64..1.0, 16),
        handle in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let q = DMatrix::from_vec(4, 4, entries).qr().q();
        prop_assume!(handle.iter().map(|h| h * h).sum::<f64>() > 1e-3);
        let base = chsh_construction();
        let g = base.graph().clone();
        let vectors: BTreeMap<_, _> = g
            .vertex_ids()
            .map(|v| {
                let a: Vec<f64> = base.vector(v).unwrap().amplitudes().iter().map(|z| z.re).collect();
                let rotated = &q * nalgebra::DVector::from_vec(a);
                (v, StateVector::normalized_real(rotated.as_slice()).unwrap())
            })
            .collect();
        let model = QuantumContextModel::new(g.clone(), vectors, StateVector::normalized_real(&handle).unwrap()).unwrap();
        let probs: BTreeMap<_, _> = model_vertex_probabilities(&model).into_iter().map(|(v, s)| (v, s.value)).collect();
        let r = correlator_inequality_value(&probs, &g).unwrap();
        prop_assert!(r.value >= 12.0 - 6.0 * (2.0 + 2f64.sqrt()) - 1e-9);
    }

    #[test]
    fn verification_is_monotone_in_tolerance(m in bell_model(), tol in 1e-12f64..1e-1, factor in 1.0f64..100.0) {
        let b = bell_local_behavior(&m);
        let spec = chsh_paradox_spec();
        if verify(&b, &spec, tol).unwrap().verified {
            prop_assert!(verify(&b, &spec, tol * factor).unwrap().verified);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn alpha_never_exceeds_theta(g in random_graph(12)) {
        let (alpha, _) = independence_number(&g).unwrap();
        let t = lovasz_theta(&g, 1e-7).unwrap();
        prop_assert!(alpha as f64 <= t.value + t.duality_gap + 1e-9, "alpha {} theta {}", alpha, t.value);
    }
}
