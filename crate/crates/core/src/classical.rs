//! Deterministic (non-contextual) models.
//!
//! Every classical behavior is a convex mixture of deterministic ones, so
//! maxima of linear quantities and the satisfiability of exact zero
//! conditions can be decided by enumerating deterministic strategies.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::paradox::ParadoxSpec;
use crate::scenario::{Event, Scenario};

pub use crate::behavior::{Behavior, BehaviorError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClassicalError {
    #[error("measurement `{0}` is not dichotomic")]
    NonDichotomic(String),
    #[error("scenario has {0} measurements; enumeration is limited to 24")]
    TooManyMeasurements(usize),
    #[error("no deterministic strategy is compatible with the scenario")]
    NoStrategy,
}

/// A fixed outcome for every measurement of a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub outcomes: BTreeMap<String, u8>,
}

impl DeterministicStrategy {
    /// Whether every assignment of `event` agrees with the strategy.
    pub fn occurs(&self, event: &Event) -> bool {
        event.assignments().iter().all(|(m, o)| self.outcomes.get(m) == Some(o))
    }

    pub fn probability(&self, event: &Event) -> f64 {
        if self.occurs(event) {
            1.0
        } else {
            0.0
        }
    }
}

/// `(a0,a1,b0,b1)` order: measurement ids sorted.
impl fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.outcomes.values().map(|o| o.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

const MAX_ENUMERATED: usize = 24;

/// All `2^m` outcome assignments, first measurement most significant.
/// Strategies that make a forbidden event occur are dropped.
pub fn enumerate_deterministic(scenario: &Scenario) -> Result<Vec<DeterministicStrategy>, ClassicalError> {
    if let Some(m) = scenario.measurements.iter().find(|m| m.num_outcomes != 2) {
        return Err(ClassicalError::NonDichotomic(m.id.clone()));
    }
    let m = scenario.measurements.len();
    if m > MAX_ENUMERATED {
        return Err(ClassicalError::TooManyMeasurements(m));
    }
    let strategies = (0u32..1 << m)
        .map(|bits| DeterministicStrategy {
            outcomes: scenario
                .measurements
                .iter()
                .enumerate()
                .map(|(k, meas)| (meas.id.clone(), ((bits >> (m - 1 - k)) & 1) as u8))
                .collect(),
        })
        .filter(|s| !scenario.forbidden.iter().any(|e| s.occurs(e)))
        .collect();
    Ok(strategies)
}

/// The indicator behavior: probability 1 on the one event per context that the strategy selects.
pub fn behavior_from_strategy(strategy: &DeterministicStrategy, scenario: &Scenario) -> Behavior {
    Behavior::from_fn(scenario.clone(), |e| strategy.probability(e)).expect("indicator behavior is normalized")
}

/// Convex mixture of deterministic strategies.
pub fn mixture_behavior(
    parts: &[(f64, DeterministicStrategy)],
    scenario: &Scenario,
) -> Result<Behavior, BehaviorError> {
    let behaviors: Vec<(f64, Behavior)> =
        parts.iter().map(|(q, s)| (*q, behavior_from_strategy(s, scenario))).collect();
    Behavior::mixture(&behaviors)
}

/// Maximum of `Σ w_i P(e_i)` over deterministic strategies, with the first
/// attaining strategy in enumeration order.
pub fn classical_max(
    events: &[(Event, f64)],
    scenario: &Scenario,
) -> Result<(f64, DeterministicStrategy), ClassicalError> {
    let mut best: Option<(f64, DeterministicStrategy)> = None;
    for s in enumerate_deterministic(scenario)? {
        let value: f64 = events.iter().map(|(e, w)| w * s.probability(e)).sum();
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, s));
        }
    }
    best.ok_or(ClassicalError::NoStrategy)
}

/// Largest positive-sum among deterministic strategies that meet every zero
/// condition and every saturation condition exactly. `None` when no strategy
/// meets them; by convexity a value of 0 rules out every classical mixture.
pub fn classical_paradox_max(
    spec: &ParadoxSpec,
    scenario: &Scenario,
) -> Result<(f64, Option<DeterministicStrategy>), ClassicalError> {
    let mut best: Option<(f64, DeterministicStrategy)> = None;
    for s in enumerate_deterministic(scenario)? {
        if !satisfies_conditions(&s, spec) {
            continue;
        }
        let value: f64 = spec.positive_events.iter().map(|e| s.probability(e)).sum();
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, s));
        }
    }
    Ok(match best {
        Some((v, s)) => (v, Some(s)),
        None => (0.0, None),
    })
}

/// Exact check of zero and saturation conditions for a deterministic strategy.
pub fn satisfies_conditions(strategy: &DeterministicStrategy, spec: &ParadoxSpec) -> bool {
    spec.zero_events.iter().all(|e| !strategy.occurs(e))
        && spec.saturation_sets.iter().all(|set| set.iter().filter(|e| strategy.occurs(e)).count() == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{chsh_events, hardy_pentagon_events};

    #[test]
    fn strategy_counts() {
        assert_eq!(enumerate_deterministic(&Scenario::bell_222()).unwrap().len(), 16);
        assert_eq!(enumerate_deterministic(&Scenario::single_measurement()).unwrap().len(), 2);
    }

    #[test]
    fn all_zero_strategy() {
        let s = Scenario::bell_222();
        let zero = &enumerate_deterministic(&s).unwrap()[0];
        assert_eq!(zero.to_string(), "(0,0,0,0)");
        let b = behavior_from_strategy(zero, &s);
        for xy in ["00", "01", "10", "11"] {
            assert_eq!(b.probability(&format!("00|{xy}").parse().unwrap()), Some(1.0));
        }
    }

    #[test]
    fn indicator_spot_checks() {
        let s = Scenario::bell_222();
        let strategies = enumerate_deterministic(&s).unwrap();
        // (a0,a1,b0,b1) = (0,1,1,0)
        let st = &strategies[0b0110];
        let b = behavior_from_strategy(st, &s);
        assert_eq!(b.probability(&"01|00".parse().unwrap()), Some(1.0));
        assert_eq!(b.probability(&"11|10".parse().unwrap()), Some(1.0));
        assert_eq!(b.probability(&"10|11".parse().unwrap()), Some(1.0));
        assert_eq!(b.probability(&"00|00".parse().unwrap()), Some(0.0));
    }

    #[test]
    fn classical_maxima() {
        let s = Scenario::bell_222();
        let unit = |evs: &[Event]| evs.iter().map(|e| (e.clone(), 1.0)).collect::<Vec<_>>();
        assert_eq!(classical_max(&unit(&chsh_events()), &s).unwrap().0, 3.0);
        assert_eq!(classical_max(&unit(&hardy_pentagon_events()), &s).unwrap().0, 2.0);
        assert_eq!(classical_max(&unit(&["11|01".parse().unwrap()]), &s).unwrap().0, 1.0);
    }

    #[test]
    fn non_dichotomic_rejected() {
        let s = Scenario::new(
            1,
            vec![crate::scenario::Measurement { id: "A0".into(), party: 0, num_outcomes: 3 }],
            vec![vec!["A0".into()]],
        )
        .unwrap();
        assert_eq!(enumerate_deterministic(&s), Err(ClassicalError::NonDichotomic("A0".into())));
    }

    #[test]
    fn mixtures_are_normalized() {
        let s = Scenario::bell_222();
        let st = enumerate_deterministic(&s).unwrap();
        let b = mixture_behavior(&[(0.25, st[1].clone()), (0.75, st[9].clone())], &s).unwrap();
        assert_eq!(b.probabilities().len(), 16);
        assert!(mixture_behavior(&[(0.5, st[1].clone())], &s).is_err());
    }
}
