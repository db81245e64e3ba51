//! Hardy-type paradoxes as data: events that must never happen, events whose
//! total probability must be positive, and exclusive sets that must saturate
//! to 1. [`verify`] checks a behavior against such a specification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Behavior;
use crate::quantum::{ep_cover_check, CONSTRUCTION_EVENTS};
use crate::scenario::{chsh_event_graph, Event, Scenario, ScenarioError};

/// Default residual tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `p_hardy` must exceed this. Kept independent of the residual tolerance
/// so that loosening the tolerance can only turn "not verified" into "verified".
pub const POSITIVITY_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParadoxError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("behavior has no probability for event {0}")]
    MissingEvent(Event),
    #[error("set {0:?} is not an exclusive cover of the scenario")]
    NotCovering(Vec<String>),
    #[error("tolerance must be non-negative, got {0}")]
    InvalidTolerance(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadoxSpec {
    pub name: String,
    pub zero_events: Vec<Event>,
    /// Their probability sum must be strictly positive.
    pub positive_events: Vec<Event>,
    /// Each set's probabilities must sum to 1.
    pub saturation_sets: Vec<Vec<Event>>,
    /// Exclusive covers the saturation sets were reduced from, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_sets: Option<Vec<Vec<Event>>>,
}

fn events(xs: &[&str]) -> Vec<Event> {
    xs.iter().map(|s| s.parse().expect("well-formed event literal")).collect()
}

impl ParadoxSpec {
    /// Every event is well formed for `scenario`, and every known full set is
    /// an exclusive cover that reduces to the matching saturation set.
    pub fn validate(&self, scenario: &Scenario) -> Result<(), ParadoxError> {
        let all = self.zero_events.iter().chain(&self.positive_events).chain(self.saturation_sets.iter().flatten());
        for e in all {
            scenario.check_event(e)?;
        }
        if let Some(full) = &self.full_sets {
            let reduced = reduce_saturation_sets(full, &self.zero_events, scenario)?;
            if reduced != self.saturation_sets {
                return Err(ParadoxError::NotCovering(full.iter().flatten().map(|e| e.to_string()).collect()));
            }
        }
        Ok(())
    }
}

/// `P(00|00) > 0` with `P(00|01) = P(00|10) = P(11|11) = 0`.
pub fn hardy_spec() -> ParadoxSpec {
    ParadoxSpec {
        name: "hardy".into(),
        zero_events: events(&["00|01", "00|10", "11|11"]),
        positive_events: events(&["00|00"]),
        saturation_sets: vec![events(&["10|01", "01|11"]), events(&["01|10", "10|11"])],
        full_sets: Some(vec![
            events(&["00|01", "10|01", "01|11", "11|11"]),
            events(&["00|10", "01|10", "10|11", "11|11"]),
        ]),
    }
}

/// `P(01|00) + P(01|10) > 0` with `P(11|00) = P(00|01) = P(11|10) = P(01|11) = 0`.
///
/// The third cover uses `(10|10)`: `(01|10)` and `(00|11)` share no
/// measurement with different outcomes, so a set containing both is not exclusive.
pub fn chsh_paradox_spec() -> ParadoxSpec {
    ParadoxSpec {
        name: "chsh".into(),
        zero_events: events(&["11|00", "00|01", "11|10", "01|11"]),
        positive_events: events(&["01|00", "01|10"]),
        saturation_sets: vec![events(&["10|00", "01|01"]), events(&["10|01", "11|11"]), events(&["10|10", "00|11"])],
        full_sets: Some(vec![
            events(&["11|00", "10|00", "00|01", "01|01"]),
            events(&["00|01", "10|01", "01|11", "11|11"]),
            events(&["11|10", "10|10", "01|11", "00|11"]),
        ]),
    }
}

/// The CHSH paradox over eight dichotomic observables `A1..A8`, one per
/// vertex of the CHSH event graph; the zeros are built into the scenario.
pub fn contextual_chsh_paradox_spec() -> ParadoxSpec {
    ParadoxSpec {
        name: "chsh-contextual".into(),
        zero_events: Vec::new(),
        positive_events: events(&["1|1", "1|8"]),
        saturation_sets: vec![events(&["1|2", "1|3"]), events(&["1|4", "1|5"]), events(&["1|6", "1|7"])],
        full_sets: None,
    }
}

/// The graph scenario of the CHSH event graph, vertex `(01|00)` labelled 1
/// and so on following the construction's vertex order.
pub fn contextual_chsh_scenario() -> Scenario {
    let graph = chsh_event_graph();
    let labels: BTreeMap<_, _> = CONSTRUCTION_EVENTS
        .iter()
        .enumerate()
        .map(|(k, e)| (graph.find_event(&e.parse().unwrap()).expect("CHSH event"), k + 1))
        .collect();
    Scenario::contextual(&graph.relabel(&labels).expect("labels are a bijection"))
}

/// Removes the zero events from each exclusive cover.
pub fn reduce_saturation_sets(
    full_sets: &[Vec<Event>],
    zeros: &[Event],
    scenario: &Scenario,
) -> Result<Vec<Vec<Event>>, ParadoxError> {
    full_sets
        .iter()
        .map(|set| {
            if !ep_cover_check(set, scenario) {
                return Err(ParadoxError::NotCovering(set.iter().map(|e| e.to_string()).collect()));
            }
            Ok(set.iter().filter(|e| !zeros.contains(e)).cloned().collect())
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionKind {
    Zero,
    Saturation,
    Positive,
}

/// One audited condition. For zeros the residual is the probability, for
/// saturations `|Σ − 1|`, for positivity the (signed) sum itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub kind: ConditionKind,
    pub label: String,
    pub value: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub spec: String,
    pub verified: bool,
    pub p_hardy: f64,
    pub tolerance: f64,
    pub positivity_threshold: f64,
    pub residuals: Vec<Residual>,
}

fn label(events: &[Event], suffix: &str) -> String {
    let terms: Vec<String> = events.iter().map(|e| format!("P{e}")).collect();
    format!("{}{suffix}", terms.join(" + "))
}

pub fn verify(behavior: &Behavior, spec: &ParadoxSpec, tol: f64) -> Result<VerificationReport, ParadoxError> {
    if !(tol >= 0.0) {
        return Err(ParadoxError::InvalidTolerance(tol));
    }
    let p = |e: &Event| behavior.probability(e).ok_or_else(|| ParadoxError::MissingEvent(e.clone()));
    let mut residuals = Vec::new();
    for e in &spec.zero_events {
        let v = p(e)?.abs();
        residuals.push(Residual {
            kind: ConditionKind::Zero,
            label: label(std::slice::from_ref(e), " = 0"),
            value: v,
            satisfied: v <= tol,
        });
    }
    for set in &spec.saturation_sets {
        let sum = set.iter().map(&p).sum::<Result<f64, _>>()?;
        let v = (sum - 1.0).abs();
        residuals.push(Residual {
            kind: ConditionKind::Saturation,
            label: label(set, " = 1"),
            value: v,
            satisfied: v <= tol,
        });
    }
    let p_hardy = spec.positive_events.iter().map(&p).sum::<Result<f64, _>>()?;
    residuals.push(Residual {
        kind: ConditionKind::Positive,
        label: label(&spec.positive_events, " > 0"),
        value: p_hardy,
        satisfied: p_hardy > POSITIVITY_THRESHOLD,
    });
    Ok(VerificationReport {
        spec: spec.name.clone(),
        verified: residuals.iter().all(|r| r.satisfied),
        p_hardy,
        tolerance: tol,
        positivity_threshold: POSITIVITY_THRESHOLD,
        residuals,
    })
}
