use exclusivity::graphs::lovasz_theta;
use exclusivity::optimize::*;
use exclusivity::paradox::{hardy_spec, verify};
use exclusivity::quantum::bell_local_behavior;
use exclusivity::scenario::ExclusivityGraph;

fn small(restarts: usize) -> OptimizerConfig {
    OptimizerConfig::default().with_restarts(restarts).with_seed(11)
}

#[test]
fn hardy_optimum_is_reproducible_from_its_parameters() {
    let r = maximize_hardy_local(&small(24)).unwrap();
    let best = r.best_value.unwrap();
    assert!((best - (5.0 * 5f64.sqrt() - 11.0) / 2.0).abs() < 1e-4, "{best}");
    assert!((evaluate(Task::HardyLocal, &r.best_parameters).unwrap() - best).abs() < 1e-9);
    assert!(r.residuals.iter().all(|x| x.value <= FEASIBILITY_TOL));

    // the optimum is a genuine Hardy behavior
    let b = bell_local_behavior(r.bell_model.as_ref().unwrap());
    let report = verify(&b, &hardy_spec(), 1e-8).unwrap();
    assert!(report.verified, "{report:?}");
}

#[test]
fn same_seed_same_result() {
    let a = maximize_chsh_paradox_local(&small(8)).unwrap();
    let b = maximize_chsh_paradox_local(&small(8)).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn result_does_not_depend_on_thread_count() {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let a = one.install(|| maximize_hardy_local(&small(6)).unwrap());
    let b = maximize_hardy_local(&small(6)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn chsh_paradox_local_optimum_vanishes_and_is_never_violating() {
    let r = maximize_chsh_paradox_local(&small(32)).unwrap();
    assert!(r.best_value.unwrap() <= 1e-6);
    assert!(!r.classification_counts.contains_key(&Classification::Violating));
    assert_eq!(r.classification_counts.values().sum::<usize>(), r.feasible_restarts);
    assert!(r.classification.is_some());
}

#[test]
fn dropping_one_zero_makes_the_paradox_reachable() {
    let r = maximize(Task::ChshParadoxLocalRelaxed, &small(8)).unwrap();
    assert!(r.best_value.unwrap() > 0.05);
}

#[test]
fn penalty_stages_never_increase_the_objective() {
    let r = maximize_hardy_local(&small(8)).unwrap();
    assert_eq!(r.stage_values.len(), OptimizerConfig::default().penalties.len());
    // the first stage is a local search from a random start and may stall below
    // the penalized optimum; from the warm-started stages on the value only falls
    for w in r.stage_values[1..].windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "{:?}", r.stage_values);
    }
}

#[test]
fn kcbs_respects_the_lovasz_bound() {
    let r = maximize_kcbs_qutrit(false, &small(16)).unwrap();
    let theta = lovasz_theta(&ExclusivityGraph::cycle(5), 1e-7).unwrap();
    let v = r.best_value.unwrap();
    assert!(v <= theta.upper + 1e-4);
    assert!((v - 5f64.sqrt()).abs() < 1e-4, "{v}");
}

#[test]
fn constrained_kcbs_reaches_two_and_a_ninth() {
    let r = maximize_kcbs_qutrit(true, &small(24)).unwrap();
    assert!((r.best_value.unwrap() - (2.0 + 1.0 / 9.0)).abs() < 1e-3);
}

#[test]
fn kcbs_needs_at_least_two_dimensions() {
    let r = maximize_kcbs(1, false, &small(2)).unwrap();
    assert!(!r.converged());
    assert!(matches!(maximize_kcbs(0, false, &small(2)), Err(OptimizeError::InvalidConfig(_))));
}

#[test]
fn invalid_configs_are_rejected() {
    let c = OptimizerConfig { penalties: vec![100.0, 10.0], ..Default::default() };
    assert!(matches!(maximize_hardy_local(&c), Err(OptimizeError::InvalidConfig(_))));
    assert!(serde_json::from_str::<OptimizerConfig>(r#"{"restart": 3}"#).is_err());
}

#[test]
fn result_json_round_trip() {
    let r = maximize_chsh_paradox_local(&small(2)).unwrap();
    let back: OptimizationResult = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back.best_parameters, r.best_parameters);
    assert_eq!(back.task, Task::ChshParadoxLocal);
}
