//! Probability assignments over the events of a scenario.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{enumerate_events, Event, Scenario, ScenarioError};

/// Per-context normalization tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BehaviorError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("event {0} is not a full-context event of the scenario")]
    NotAContextEvent(Event),
    #[error("missing probability for event {0}")]
    Missing(Event),
    #[error("probability {value} of event {event} is outside [0, 1]")]
    OutOfRange { event: Event, value: f64 },
    #[error("context {context:?} sums to {sum}, not 1")]
    NotNormalized { context: Vec<String>, sum: f64 },
    #[error("mixture weights must be non-negative and sum to 1")]
    BadMixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventProbability {
    pub event: Event,
    pub p: f64,
}

#[derive(Deserialize)]
struct RawBehavior {
    scenario: Scenario,
    probabilities: Vec<EventProbability>,
}

#[derive(Serialize)]
struct BehaviorRef<'a> {
    scenario: &'a Scenario,
    probabilities: Vec<EventProbability>,
}

/// A full probability assignment to every full-context event of a scenario.
///
/// Construction checks non-negativity and per-context normalization. Events
/// coarser than a context (e.g. atomic `(a|x)`) are answered by
/// marginalizing a context that contains all their measurements.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(try_from = "RawBehavior")]
pub struct Behavior {
    scenario: Scenario,
    probabilities: BTreeMap<Event, f64>,
}

impl Serialize for Behavior {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        BehaviorRef {
            scenario: &self.scenario,
            probabilities: self.probabilities.iter().map(|(e, &p)| EventProbability { event: e.clone(), p }).collect(),
        }
        .serialize(s)
    }
}

impl TryFrom<RawBehavior> for Behavior {
    type Error = BehaviorError;
    fn try_from(raw: RawBehavior) -> Result<Self, Self::Error> {
        Behavior::new(raw.scenario, raw.probabilities.into_iter().map(|ep| (ep.event, ep.p)).collect())
    }
}

impl Behavior {
    pub fn new(scenario: Scenario, probabilities: BTreeMap<Event, f64>) -> Result<Self, BehaviorError> {
        let events = enumerate_events(&scenario);
        for e in probabilities.keys() {
            if !events.contains(e) {
                return Err(BehaviorError::NotAContextEvent(e.clone()));
            }
        }
        for e in &events {
            let p = *probabilities.get(e).ok_or_else(|| BehaviorError::Missing(e.clone()))?;
            if !(-NORMALIZATION_TOL..=1.0 + NORMALIZATION_TOL).contains(&p) {
                return Err(BehaviorError::OutOfRange { event: e.clone(), value: p });
            }
        }
        for ctx in scenario.canonical_contexts() {
            let sum: f64 = scenario.context_events(&ctx).iter().map(|e| probabilities[e]).sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(BehaviorError::NotNormalized { context: ctx, sum });
            }
        }
        Ok(Behavior { scenario, probabilities })
    }

    /// Builds a behavior by evaluating `p` on every full-context event.
    pub fn from_fn(scenario: Scenario, mut p: impl FnMut(&Event) -> f64) -> Result<Self, BehaviorError> {
        let probabilities = enumerate_events(&scenario).into_iter().map(|e| {
            let v = p(&e);
            (e, v)
        });
        Behavior::new(scenario.clone(), probabilities.collect())
    }

    /// Every outcome tuple of every context equally likely.
    pub fn uniform(scenario: Scenario) -> Self {
        let ctxs = scenario.canonical_contexts();
        let mut probabilities = BTreeMap::new();
        for ctx in &ctxs {
            let events = scenario.context_events(ctx);
            let p = 1.0 / events.len() as f64;
            for e in events {
                probabilities.insert(e, p);
            }
        }
        Behavior::new(scenario, probabilities).expect("uniform behavior is normalized")
    }

    /// Convex combination `Σ q_k B_k` of behaviors over the same scenario.
    pub fn mixture(parts: &[(f64, Behavior)]) -> Result<Self, BehaviorError> {
        let total: f64 = parts.iter().map(|(q, _)| q).sum();
        if parts.is_empty() || parts.iter().any(|(q, _)| *q < 0.0) || (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(BehaviorError::BadMixture);
        }
        let scenario = parts[0].1.scenario.clone();
        if parts.iter().any(|(_, b)| b.scenario != scenario) {
            return Err(BehaviorError::BadMixture);
        }
        Behavior::from_fn(scenario, |e| parts.iter().map(|(q, b)| q * b.probabilities[e]).sum())
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn probabilities(&self) -> &BTreeMap<Event, f64> {
        &self.probabilities
    }

    /// Probability of `event`, marginalizing from the first canonical context
    /// that contains all its measurements.
    pub fn probability(&self, event: &Event) -> Option<f64> {
        if let Some(&p) = self.probabilities.get(event) {
            return Some(p);
        }
        let ctx = self
            .scenario
            .canonical_contexts()
            .into_iter()
            .find(|ctx| event.measurements().all(|m| ctx.iter().any(|c| c == m)))?;
        self.marginal_in(event, &ctx)
    }

    /// Marginal of `event` computed inside one specific context.
    pub fn marginal_in(&self, event: &Event, context: &[String]) -> Option<f64> {
        if !event.measurements().all(|m| context.iter().any(|c| c == m)) {
            return None;
        }
        let sum = self
            .scenario
            .context_events(context)
            .iter()
            .filter(|full| event.is_refined_by(full))
            .map(|full| self.probabilities[full])
            .sum();
        Some(sum)
    }

    pub fn sum_of(&self, events: &[Event]) -> Result<f64, BehaviorError> {
        events.iter().map(|e| self.probability(e).ok_or_else(|| BehaviorError::Missing(e.clone()))).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_222() {
        let b = Behavior::uniform(Scenario::bell_222());
        assert_eq!(b.probabilities().len(), 16);
        assert_eq!(b.probability(&"01|10".parse().unwrap()), Some(0.25));
        assert_eq!(b.probability(&Event::new([("A1", 0)]).unwrap()), Some(0.5));
    }

    #[test]
    fn rejects_unnormalized() {
        let s = Scenario::bell_222_single_context(0, 0);
        let err = Behavior::from_fn(s, |_| 0.3).unwrap_err();
        assert!(matches!(err, BehaviorError::NotNormalized { .. }));
    }

    #[test]
    fn rejects_negative_and_missing() {
        let s = Scenario::bell_222_single_context(0, 0);
        let err = Behavior::from_fn(s.clone(), |e| if e.to_string() == "(00|00)" { -0.5 } else { 0.5 }).unwrap_err();
        assert!(matches!(err, BehaviorError::OutOfRange { .. }));
        assert!(matches!(Behavior::new(s, BTreeMap::new()), Err(BehaviorError::Missing(_))));
    }

    #[test]
    fn json_round_trip() {
        let b = Behavior::uniform(Scenario::bell_222());
        let s = serde_json::to_string(&b).unwrap();
        let back: Behavior = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
    }
}
