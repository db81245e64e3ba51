//! Measurement scenarios, events and the exclusivity graph of an experiment.
//!
//! An [`Event`] is an assignment of outcomes to a set of jointly performed
//! measurements. Two events are *exclusive* when they assign different
//! outcomes to a measurement they share. Enumerating every full-context event
//! of a [`Scenario`] and joining the exclusive pairs gives the
//! [`ExclusivityGraph`] of the experiment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a vertex inside an [`ExclusivityGraph`].
pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("measurement `{0}` declared twice")]
    DuplicateMeasurement(String),
    #[error("measurement `{id}` needs at least two outcomes, got {outcomes}")]
    TooFewOutcomes { id: String, outcomes: u8 },
    #[error("measurement `{id}` belongs to party {party} but the scenario has {parties} parties")]
    UnknownParty { id: String, party: usize, parties: usize },
    #[error("unknown measurement `{0}`")]
    UnknownMeasurement(String),
    #[error("context #{0} is empty")]
    EmptyContext(usize),
    #[error("context #{index} uses party {party} more than once")]
    PartyReused { index: usize, party: usize },
    #[error("context #{index} repeats measurement `{id}`")]
    RepeatedInContext { index: usize, id: String },
    #[error("event has no assignments")]
    EmptyEvent,
    #[error("event assigns measurement `{0}` twice")]
    ConflictingAssignment(String),
    #[error("outcome {outcome} out of range for measurement `{id}`")]
    OutcomeOutOfRange { id: String, outcome: u8 },
    #[error("cannot parse event `{0}`")]
    Parse(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("duplicate vertex {0}")]
    DuplicateVertex(VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("vertex {id} has invalid weight {weight}")]
    InvalidWeight { id: VertexId, weight: f64 },
}

/// A measurement with a finite number of outcomes `0..num_outcomes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub id: String,
    pub party: usize,
    pub num_outcomes: u8,
}

impl Measurement {
    pub fn dichotomic(id: impl Into<String>, party: usize) -> Self {
        Measurement { id: id.into(), party, num_outcomes: 2 }
    }
}

/// An assignment of outcomes to measurements, kept sorted by measurement id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(String, u8)>", into = "Vec<(String, u8)>")]
pub struct Event {
    assignments: Vec<(String, u8)>,
}

impl Event {
    pub fn new<I, S>(assignments: I) -> Result<Self, ScenarioError>
    where
        I: IntoIterator<Item = (S, u8)>,
        S: Into<String>,
    {
        let mut assignments: Vec<(String, u8)> = assignments.into_iter().map(|(id, o)| (id.into(), o)).collect();
        if assignments.is_empty() {
            return Err(ScenarioError::EmptyEvent);
        }
        assignments.sort();
        for pair in assignments.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(ScenarioError::ConflictingAssignment(pair[0].0.clone()));
            }
        }
        Ok(Event { assignments })
    }

    /// The bipartite event `(a,b|x,y)`: Alice measures `A{x}` and gets `a`,
    /// Bob measures `B{y}` and gets `b`.
    pub fn bell(a: u8, b: u8, x: u8, y: u8) -> Self {
        Event { assignments: vec![(format!("A{x}"), a), (format!("B{y}"), b)] }
    }

    /// Atomic event `(a|k)` on the single measurement `A{k}`.
    pub fn atomic(outcome: u8, k: usize) -> Self {
        Event { assignments: vec![(format!("A{k}"), outcome)] }
    }

    pub fn assignments(&self) -> &[(String, u8)] {
        &self.assignments
    }

    pub fn outcome_of(&self, id: &str) -> Option<u8> {
        self.assignments.binary_search_by(|(m, _)| m.as_str().cmp(id)).ok().map(|i| self.assignments[i].1)
    }

    pub fn measurements(&self) -> impl Iterator<Item = &str> {
        self.assignments.iter().map(|(m, _)| m.as_str())
    }

    /// `(a, b, x, y)` when the event has the bipartite `A{x}`/`B{y}` shape.
    pub fn as_bell(&self) -> Option<(u8, u8, u8, u8)> {
        match self.assignments.as_slice() {
            [(ma, a), (mb, b)] => {
                let x = ma.strip_prefix('A')?.parse().ok()?;
                let y = mb.strip_prefix('B')?.parse().ok()?;
                Some((*a, *b, x, y))
            }
            _ => None,
        }
    }

    /// True when `other` assigns the same outcome to every measurement of `self`.
    pub fn is_refined_by(&self, other: &Event) -> bool {
        self.assignments.iter().all(|(m, o)| other.outcome_of(m) == Some(*o))
    }
}

impl TryFrom<Vec<(String, u8)>> for Event {
    type Error = ScenarioError;
    fn try_from(v: Vec<(String, u8)>) -> Result<Self, Self::Error> {
        Event::new(v)
    }
}

impl From<Event> for Vec<(String, u8)> {
    fn from(e: Event) -> Self {
        e.assignments
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((a, b, x, y)) = self.as_bell() {
            return write!(f, "({a}{b}|{x}{y})");
        }
        if let [(m, o)] = self.assignments.as_slice() {
            if let Some(k) = m.strip_prefix('A') {
                return write!(f, "({o}|{k})");
            }
        }
        let parts: Vec<String> = self.assignments.iter().map(|(m, o)| format!("{m}={o}")).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Parses the compact notations `"01|00"` (bipartite, binary digits) and
/// `"1|3"` (atomic outcome 1 of measurement `A3`). Parentheses are optional.
impl FromStr for Event {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScenarioError::Parse(s.to_string());
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let (outcomes, settings) = t.split_once('|').ok_or_else(err)?;
        let outcomes = outcomes.replace(',', "");
        let settings = settings.replace(',', "");
        if outcomes.len() == 2 && settings.len() == 2 {
            let d = |c: char| c.to_digit(10).map(|v| v as u8).ok_or_else(err);
            let mut o = outcomes.chars();
            let mut m = settings.chars();
            let (a, b) = (d(o.next().unwrap())?, d(o.next().unwrap())?);
            let (x, y) = (d(m.next().unwrap())?, d(m.next().unwrap())?);
            return Ok(Event::bell(a, b, x, y));
        }
        if outcomes.len() == 1 {
            let a: u8 = outcomes.parse().map_err(|_| err())?;
            let k: usize = settings.parse().map_err(|_| err())?;
            return Ok(Event::atomic(a, k));
        }
        Err(err())
    }
}

/// Two events are exclusive when some shared measurement has different outcomes.
pub fn are_exclusive(e1: &Event, e2: &Event) -> bool {
    let (mut i, mut j) = (0, 0);
    let (a, b) = (&e1.assignments, &e2.assignments);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if a[i].1 != b[j].1 {
                    return true;
                }
                i += 1;
                j += 1;
            }
        }
    }
    false
}

#[derive(Deserialize)]
struct RawScenario {
    parties: usize,
    measurements: Vec<Measurement>,
    contexts: Vec<Vec<String>>,
    #[serde(default)]
    forbidden: Vec<Event>,
}

/// A set of measurements together with the contexts in which they are
/// jointly performed.
///
/// `forbidden` lists events that the scenario itself rules out, e.g. the
/// `(1,1|i,j)` outcomes of two exclusive projectors in a graph-derived
/// contextuality scenario. Deterministic models never make them occur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    pub parties: usize,
    pub measurements: Vec<Measurement>,
    pub contexts: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbidden: Vec<Event>,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = ScenarioError;
    fn try_from(raw: RawScenario) -> Result<Self, Self::Error> {
        Scenario::with_forbidden(raw.parties, raw.measurements, raw.contexts, raw.forbidden)
    }
}

impl Scenario {
    pub fn new(
        parties: usize,
        measurements: Vec<Measurement>,
        contexts: Vec<Vec<String>>,
    ) -> Result<Self, ScenarioError> {
        Self::with_forbidden(parties, measurements, contexts, Vec::new())
    }

    pub fn with_forbidden(
        parties: usize,
        measurements: Vec<Measurement>,
        contexts: Vec<Vec<String>>,
        forbidden: Vec<Event>,
    ) -> Result<Self, ScenarioError> {
        let mut seen = BTreeSet::new();
        for m in &measurements {
            if !seen.insert(m.id.clone()) {
                return Err(ScenarioError::DuplicateMeasurement(m.id.clone()));
            }
            if m.num_outcomes < 2 {
                return Err(ScenarioError::TooFewOutcomes { id: m.id.clone(), outcomes: m.num_outcomes });
            }
            if m.party >= parties {
                return Err(ScenarioError::UnknownParty { id: m.id.clone(), party: m.party, parties });
            }
        }
        let scenario = Scenario { parties, measurements, contexts, forbidden };
        for (index, ctx) in scenario.contexts.iter().enumerate() {
            if ctx.is_empty() {
                return Err(ScenarioError::EmptyContext(index));
            }
            let mut ids = BTreeSet::new();
            let mut used_parties = BTreeSet::new();
            for id in ctx {
                let m = scenario.measurement(id).ok_or_else(|| ScenarioError::UnknownMeasurement(id.clone()))?;
                if !ids.insert(id) {
                    return Err(ScenarioError::RepeatedInContext { index, id: id.clone() });
                }
                if parties > 1 && !used_parties.insert(m.party) {
                    return Err(ScenarioError::PartyReused { index, party: m.party });
                }
            }
        }
        for e in &scenario.forbidden {
            scenario.check_event(e)?;
        }
        Ok(scenario)
    }

    /// Two parties, two dichotomic measurements each, all four `A{x}B{y}` contexts.
    pub fn bell_222() -> Self {
        let measurements = vec![
            Measurement::dichotomic("A0", 0),
            Measurement::dichotomic("A1", 0),
            Measurement::dichotomic("B0", 1),
            Measurement::dichotomic("B1", 1),
        ];
        let contexts = (0..2).flat_map(|x| (0..2).map(move |y| vec![format!("A{x}"), format!("B{y}")])).collect();
        Scenario::new(2, measurements, contexts).expect("2-2-2 scenario is valid")
    }

    /// The 2-2-2 measurements restricted to the single context `{A{x}, B{y}}`.
    pub fn bell_222_single_context(x: u8, y: u8) -> Self {
        let ids = [format!("A{x}"), format!("B{y}")];
        let measurements = vec![Measurement::dichotomic(&ids[0], 0), Measurement::dichotomic(&ids[1], 1)];
        Scenario::new(2, measurements, vec![ids.to_vec()]).expect("single context is valid")
    }

    /// One dichotomic measurement `A0`.
    pub fn single_measurement() -> Self {
        Scenario::new(1, vec![Measurement::dichotomic("A0", 0)], vec![vec!["A0".into()]])
            .expect("single measurement is valid")
    }

    /// Contextuality scenario read off a graph: one dichotomic measurement
    /// `A{id}` per vertex, one context per edge, and `(1,1|i,j)` forbidden on
    /// every edge (two exclusive projectors never both fire).
    pub fn contextual(graph: &ExclusivityGraph) -> Self {
        let measurements = graph.vertex_ids().map(|id| Measurement::dichotomic(format!("A{id}"), 0)).collect();
        let contexts = graph.edges().iter().map(|&(i, j)| vec![format!("A{i}"), format!("A{j}")]).collect();
        let forbidden = graph
            .edges()
            .iter()
            .map(|&(i, j)| Event::new([(format!("A{i}"), 1), (format!("A{j}"), 1)]).expect("distinct vertices"))
            .collect();
        Scenario::with_forbidden(1, measurements, contexts, forbidden).expect("graph scenario is valid")
    }

    pub fn measurement(&self, id: &str) -> Option<&Measurement> {
        self.measurements.iter().find(|m| m.id == id)
    }

    /// Checks that every assignment names a known measurement with an in-range outcome.
    pub fn check_event(&self, event: &Event) -> Result<(), ScenarioError> {
        for (id, outcome) in event.assignments() {
            let m = self.measurement(id).ok_or_else(|| ScenarioError::UnknownMeasurement(id.clone()))?;
            if *outcome >= m.num_outcomes {
                return Err(ScenarioError::OutcomeOutOfRange { id: id.clone(), outcome: *outcome });
            }
        }
        Ok(())
    }

    /// Contexts with their ids sorted, in sorted order.
    pub fn canonical_contexts(&self) -> Vec<Vec<String>> {
        let mut ctxs: Vec<Vec<String>> = self
            .contexts
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort();
                c
            })
            .collect();
        ctxs.sort();
        ctxs.dedup();
        ctxs
    }

    /// All full-context events of one context, outcome tuples in lexicographic order.
    pub fn context_events(&self, context: &[String]) -> Vec<Event> {
        let mut ids: Vec<&String> = context.iter().collect();
        ids.sort();
        let ranges: Vec<u8> = ids.iter().map(|id| self.measurement(id).map(|m| m.num_outcomes).unwrap_or(0)).collect();
        let mut out = Vec::new();
        let mut tuple = vec![0u8; ids.len()];
        if ranges.contains(&0) {
            return out;
        }
        loop {
            let ev = Event::new(ids.iter().zip(&tuple).map(|(id, &o)| ((*id).clone(), o)))
                .expect("context ids are distinct");
            out.push(ev);
            // odometer, last position fastest
            let mut pos = ids.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < ranges[pos] {
                    break;
                }
                tuple[pos] = 0;
            }
        }
    }
}

/// Every full-context event of the scenario: contexts in sorted order, then
/// outcome tuples lexicographically.
pub fn enumerate_events(scenario: &Scenario) -> Vec<Event> {
    scenario.canonical_contexts().iter().flat_map(|ctx| scenario.context_events(ctx)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<Event>,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct RawGraph {
    vertices: Vec<Vertex>,
    #[serde(default)]
    edges: Vec<(VertexId, VertexId)>,
}

/// Simple undirected graph whose vertices optionally carry events and weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct ExclusivityGraph {
    vertices: Vec<Vertex>,
    edges: BTreeSet<(VertexId, VertexId)>,
    #[serde(skip)]
    index: BTreeMap<VertexId, usize>,
}

impl TryFrom<RawGraph> for ExclusivityGraph {
    type Error = ScenarioError;
    fn try_from(raw: RawGraph) -> Result<Self, Self::Error> {
        ExclusivityGraph::new(raw.vertices, raw.edges)
    }
}

impl ExclusivityGraph {
    pub fn new(
        vertices: Vec<Vertex>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, ScenarioError> {
        let mut index = BTreeMap::new();
        for (pos, v) in vertices.iter().enumerate() {
            if index.insert(v.id, pos).is_some() {
                return Err(ScenarioError::DuplicateVertex(v.id));
            }
            if !(v.weight.is_finite() && v.weight >= 0.0) {
                return Err(ScenarioError::InvalidWeight { id: v.id, weight: v.weight });
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(ScenarioError::SelfLoop(a));
            }
            for id in [a, b] {
                if !index.contains_key(&id) {
                    return Err(ScenarioError::UnknownVertex(id));
                }
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(ExclusivityGraph { vertices, edges: set, index })
    }

    /// Unlabelled, unit-weight graph on vertices `0..n`.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<Self, ScenarioError> {
        let vertices = (0..n).map(|id| Vertex { id, event: None, weight: 1.0 }).collect();
        Self::new(vertices, edges)
    }

    /// Events become vertices `0..n` in the given order; edges join exclusive pairs.
    pub fn from_events(events: &[Event]) -> Self {
        let vertices: Vec<Vertex> =
            events.iter().enumerate().map(|(id, e)| Vertex { id, event: Some(e.clone()), weight: 1.0 }).collect();
        let mut edges = Vec::new();
        for i in 0..events.len() {
            for j in i + 1..events.len() {
                if are_exclusive(&events[i], &events[j]) {
                    edges.push((i, j));
                }
            }
        }
        Self::new(vertices, edges).expect("event graph is well-formed")
    }

    pub fn cycle(n: usize) -> Self {
        Self::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is well-formed")
    }

    pub fn complete(n: usize) -> Self {
        Self::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))))
            .expect("complete graph is well-formed")
    }

    pub fn edgeless(n: usize) -> Self {
        Self::from_edges(n, std::iter::empty()).expect("edgeless graph is well-formed")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().map(|v| v.id)
    }

    pub fn vertex(&self, id: VertexId) -> Option<&Vertex> {
        self.index.get(&id).map(|&p| &self.vertices[p])
    }

    /// Position of a vertex in canonical (storage) order.
    pub fn position(&self, id: VertexId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    pub fn order(&self) -> usize {
        self.vertices.len()
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn is_adjacent(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, id: VertexId) -> Vec<VertexId> {
        self.vertex_ids().filter(|&o| o != id && self.is_adjacent(id, o)).collect()
    }

    pub fn degree(&self, id: VertexId) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == id || b == id).count()
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let mut degrees = self.vertex_ids().map(|v| self.degree(v));
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    /// Vertex carrying `event`, if any.
    pub fn find_event(&self, event: &Event) -> Option<VertexId> {
        self.vertices.iter().find(|v| v.event.as_ref() == Some(event)).map(|v| v.id)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.weight).collect()
    }

    pub fn with_weights(mut self, weights: &BTreeMap<VertexId, f64>) -> Result<Self, ScenarioError> {
        for (&id, &w) in weights {
            let pos = self.position(id).ok_or(ScenarioError::UnknownVertex(id))?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(ScenarioError::InvalidWeight { id, weight: w });
            }
            self.vertices[pos].weight = w;
        }
        Ok(self)
    }

    /// Adjacency as bitmasks over canonical positions. Only valid for ≤ 64 vertices.
    pub(crate) fn adjacency_masks(&self) -> Vec<u64> {
        debug_assert!(self.order() <= 64);
        let mut masks = vec![0u64; self.order()];
        for &(a, b) in &self.edges {
            let (pa, pb) = (self.index[&a], self.index[&b]);
            masks[pa] |= 1 << pb;
            masks[pb] |= 1 << pa;
        }
        masks
    }

    /// Renames vertices through `map` (which must be injective and total).
    pub fn relabel(&self, map: &BTreeMap<VertexId, VertexId>) -> Result<Self, ScenarioError> {
        let get = |id: VertexId| map.get(&id).copied().ok_or(ScenarioError::UnknownVertex(id));
        let mut vertices = Vec::with_capacity(self.order());
        for v in &self.vertices {
            vertices.push(Vertex { id: get(v.id)?, ..v.clone() });
        }
        vertices.sort_by_key(|v| v.id);
        let edges =
            self.edges.iter().map(|&(a, b)| Ok((get(a)?, get(b)?))).collect::<Result<Vec<_>, ScenarioError>>()?;
        Self::new(vertices, edges)
    }
}

pub fn build_exclusivity_graph(scenario: &Scenario) -> ExclusivityGraph {
    ExclusivityGraph::from_events(&enumerate_events(scenario))
}

/// Induced subgraph on `ids`; vertex ids and canonical order are preserved.
pub fn subgraph(graph: &ExclusivityGraph, ids: &[VertexId]) -> Result<ExclusivityGraph, ScenarioError> {
    let keep: BTreeSet<VertexId> = ids.iter().copied().collect();
    for &id in &keep {
        if graph.vertex(id).is_none() {
            return Err(ScenarioError::UnknownVertex(id));
        }
    }
    let vertices = graph.vertices().iter().filter(|v| keep.contains(&v.id)).cloned().collect();
    let edges = graph.edges().iter().copied().filter(|(a, b)| keep.contains(a) && keep.contains(b));
    ExclusivityGraph::new(vertices, edges)
}

/// The eight events of the probability-form CHSH inequality.
pub fn chsh_events() -> [Event; 8] {
    ["01|00", "10|00", "01|01", "10|01", "01|10", "10|10", "00|11", "11|11"].map(|s| s.parse().unwrap())
}

/// The five events of the Hardy pentagon in cycle order, starting from `(00|00)`.
pub fn hardy_pentagon_events() -> [Event; 5] {
    ["00|00", "10|01", "01|11", "10|11", "01|10"].map(|s| s.parse().unwrap())
}

/// Vertex ids of `events` in `graph`; `None` if any is missing.
pub fn vertices_of(graph: &ExclusivityGraph, events: &[Event]) -> Option<Vec<VertexId>> {
    events.iter().map(|e| graph.find_event(e)).collect()
}

/// Induced subgraph of the 2-2-2 graph on the CHSH events.
pub fn chsh_event_graph() -> ExclusivityGraph {
    let full = build_exclusivity_graph(&Scenario::bell_222());
    let ids = vertices_of(&full, &chsh_events()).expect("CHSH events belong to 2-2-2");
    subgraph(&full, &ids).expect("ids come from the graph")
}
