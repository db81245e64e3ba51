//! Event-sum inequalities (CHSH in probability form, KCBS) and the edge
//! correlator inequality of a graph, with their classical bounds.
//!
//! Sign convention for correlators: probability outcome 1 (the projector
//! fires) is observable value −1, so for an edge `(i, j)` with
//! `P(1,1|i,j) = 0`, `⟨A_i A_j⟩ = 1 − 2[p(1|i) + p(1|j)]`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{Behavior, BehaviorError};
use crate::graphs::{weighted_independence_number, GraphError};
use crate::quantum::{bell_local_behavior, BellLocalModel, BlochAngles};
use crate::scenario::{chsh_events, ExclusivityGraph, VertexId};
use crate::vector::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InequalityError {
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no probability for vertex {0}")]
    MissingVertex(VertexId),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("graph vertex {0} carries no event")]
    NoEvent(VertexId),
}

/// `Σ P(e)` over the eight CHSH events; at most 3 classically.
pub fn s_chsh(behavior: &Behavior) -> Result<f64, InequalityError> {
    Ok(behavior.sum_of(&chsh_events())?)
}

/// Plain sum of five pentagon-vertex probabilities; at most 2 classically.
pub fn s_kcbs(probabilities: &[f64]) -> Result<f64, InequalityError> {
    if probabilities.len() != 5 {
        return Err(InequalityError::Arity { expected: 5, got: probabilities.len() });
    }
    Ok(probabilities.iter().sum())
}

pub fn edge_correlators(
    probs: &BTreeMap<VertexId, f64>,
    graph: &ExclusivityGraph,
) -> Result<BTreeMap<(VertexId, VertexId), f64>, InequalityError> {
    let p = |v: VertexId| probs.get(&v).copied().ok_or(InequalityError::MissingVertex(v));
    graph.edges().iter().map(|&(i, j)| Ok(((i, j), 1.0 - 2.0 * (p(i)? + p(j)?)))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeCorrelator {
    pub edge: (VertexId, VertexId),
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorReport {
    /// Raw `Σ_edges ⟨A_i A_j⟩`.
    pub value: f64,
    /// Deterministic minimum `|E| − 2 max_S Σ_{i∈S} deg(i)` over independent sets `S`;
    /// `|E| − 2dα` on a `d`-regular graph.
    pub bound: f64,
    pub violated: bool,
    pub regular_degree: Option<usize>,
    /// `|E| − 2d Σ p(1|i)`, only meaningful on a `d`-regular graph.
    pub closed_form: Option<f64>,
    pub per_edge: Vec<EdgeCorrelator>,
}

/// Edge-correlator sum with its classical (non-contextual) lower bound.
pub fn correlator_inequality_value(
    probs: &BTreeMap<VertexId, f64>,
    graph: &ExclusivityGraph,
) -> Result<CorrelatorReport, InequalityError> {
    let per_edge = edge_correlators(probs, graph)?;
    let value = per_edge.values().sum();
    let bound = correlator_bound(graph)?;
    let regular_degree = graph.regular_degree();
    let closed_form = regular_degree
        .map(|d| graph.size() as f64 - 2.0 * d as f64 * graph.vertex_ids().map(|v| probs[&v]).sum::<f64>());
    if regular_degree.is_none() {
        log::warn!("graph is not regular; the closed form does not apply");
    }
    Ok(CorrelatorReport {
        value,
        bound,
        violated: value < bound,
        regular_degree,
        closed_form,
        per_edge: per_edge.into_iter().map(|(edge, value)| EdgeCorrelator { edge, value }).collect(),
    })
}

/// Smallest edge-correlator sum reachable by a deterministic assignment.
pub fn correlator_bound(graph: &ExclusivityGraph) -> Result<f64, InequalityError> {
    let degrees: BTreeMap<VertexId, f64> = graph.vertex_ids().map(|v| (v, graph.degree(v) as f64)).collect();
    let weighted =
        graph.clone().with_weights(&degrees).map_err(|e| GraphError::InvalidRepresentation(e.to_string()))?;
    let (best, _) = weighted_independence_number(&weighted)?;
    Ok(graph.size() as f64 - 2.0 * best)
}

/// Exact edge sum and, on a regular graph, the exact closed form.
pub fn correlator_sum_exact(
    probs: &BTreeMap<VertexId, Rational>,
    graph: &ExclusivityGraph,
) -> Result<(Rational, Option<Rational>), InequalityError> {
    let p = |v: VertexId| probs.get(&v).copied().ok_or(InequalityError::MissingVertex(v));
    let one = Rational::from(1);
    let two = Rational::from(2);
    let mut sum = Rational::from(0);
    for &(i, j) in graph.edges() {
        sum += one - two * (p(i)? + p(j)?);
    }
    let closed = match graph.regular_degree() {
        Some(d) => {
            let total = graph.vertex_ids().map(p).sum::<Result<Rational, _>>()?;
            Some(Rational::from(graph.size() as i64) - Rational::from(2 * d as i64) * total)
        }
        None => None,
    };
    Ok((sum, closed))
}

/// `(Σ_i w_i p(1|i), α_w(G))`.
pub fn generalized_vertex_sum_bound(
    probs: &BTreeMap<VertexId, f64>,
    graph: &ExclusivityGraph,
) -> Result<(f64, f64), InequalityError> {
    let value = graph
        .vertices()
        .iter()
        .map(|v| probs.get(&v.id).map(|p| v.weight * p).ok_or(InequalityError::MissingVertex(v.id)))
        .sum::<Result<f64, _>>()?;
    let (alpha, _) = weighted_independence_number(graph)?;
    Ok((value, alpha))
}

/// The maximal CHSH violation, two qubits in `(|00⟩ + |11⟩)/√2`, measured in
/// the x–z plane at angles `0, 3π/2` (Alice) and `3π/4, 5π/4` (Bob). The
/// event sum reaches `2 + √2`, but e.g. `P(11|00) = cos²(3π/8)/2 ≠ 0`, so
/// the CHSH paradox conditions fail.
pub fn tsirelson_counterexample() -> Behavior {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let xz = |angle: f64| BlochAngles::wrapped(angle, 0.0);
    let model =
        BellLocalModel::new([s, 0.0, 0.0, s], [0.0; 3], [xz(0.0), xz(1.5 * PI)], [xz(0.75 * PI), xz(1.25 * PI)])
            .expect("valid two-qubit model");
    bell_local_behavior(&model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityKind {
    EventSum,
    EdgeCorrelator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AtMost,
    AtLeast,
}

/// A linear inequality read off a graph. Event sums are bounded above by
/// `α_w(G)`, edge-correlator sums below by [`correlator_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalitySpec {
    pub name: String,
    pub kind: InequalityKind,
    pub graph: ExclusivityGraph,
    pub bound: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub direction: Direction,
    pub violated: bool,
    pub breakdown: Vec<Term>,
}

impl InequalitySpec {
    pub fn new(
        name: impl Into<String>,
        kind: InequalityKind,
        graph: ExclusivityGraph,
    ) -> Result<Self, InequalityError> {
        let (bound, direction) = match kind {
            InequalityKind::EventSum => (weighted_independence_number(&graph)?.0, Direction::AtMost),
            InequalityKind::EdgeCorrelator => (correlator_bound(&graph)?, Direction::AtLeast),
        };
        Ok(InequalitySpec { name: name.into(), kind, graph, bound, direction })
    }

    /// Probability-form CHSH: eight events, bound 3.
    pub fn chsh() -> Self {
        Self::new("chsh", InequalityKind::EventSum, crate::scenario::chsh_event_graph()).expect("small graph")
    }

    /// KCBS on a bare pentagon, bound 2.
    pub fn kcbs() -> Self {
        Self::new("kcbs", InequalityKind::EventSum, ExclusivityGraph::cycle(5)).expect("small graph")
    }

    /// Correlator sum over the CHSH event graph, bound −6.
    pub fn chsh_correlator() -> Self {
        Self::new("chsh-correlator", InequalityKind::EdgeCorrelator, crate::scenario::chsh_event_graph())
            .expect("small graph")
    }

    fn report(&self, value: f64, breakdown: Vec<Term>) -> InequalityReport {
        let violated = match self.direction {
            Direction::AtMost => value > self.bound,
            Direction::AtLeast => value < self.bound,
        };
        InequalityReport {
            name: self.name.clone(),
            value,
            bound: self.bound,
            direction: self.direction,
            violated,
            breakdown,
        }
    }

    /// Evaluates on per-vertex probabilities `p(1|i)`.
    pub fn evaluate_vertex_probabilities(
        &self,
        probs: &BTreeMap<VertexId, f64>,
    ) -> Result<InequalityReport, InequalityError> {
        match self.kind {
            InequalityKind::EventSum => {
                let terms = self
                    .graph
                    .vertices()
                    .iter()
                    .map(|v| {
                        let p = probs.get(&v.id).ok_or(InequalityError::MissingVertex(v.id))?;
                        let label =
                            v.event.as_ref().map(|e| format!("P{e}")).unwrap_or_else(|| format!("p(1|{})", v.id));
                        Ok(Term { label, value: v.weight * p })
                    })
                    .collect::<Result<Vec<_>, InequalityError>>()?;
                Ok(self.report(terms.iter().map(|t| t.value).sum(), terms))
            }
            InequalityKind::EdgeCorrelator => {
                let r = correlator_inequality_value(probs, &self.graph)?;
                let terms = r
                    .per_edge
                    .iter()
                    .map(|e| Term { label: format!("<A{}A{}>", e.edge.0, e.edge.1), value: e.value })
                    .collect();
                Ok(self.report(r.value, terms))
            }
        }
    }

    /// Evaluates on a behavior through the events carried by the graph's vertices.
    pub fn evaluate_behavior(&self, behavior: &Behavior) -> Result<InequalityReport, InequalityError> {
        let probs = self
            .graph
            .vertices()
            .iter()
            .map(|v| {
                let e = v.event.as_ref().ok_or(InequalityError::NoEvent(v.id))?;
                let p = behavior.probability(e).ok_or_else(|| BehaviorError::Missing(e.clone()))?;
                Ok((v.id, p))
            })
            .collect::<Result<BTreeMap<_, _>, InequalityError>>()?;
        self.evaluate_vertex_probabilities(&probs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paradox::{chsh_paradox_spec, verify, DEFAULT_TOL};
    use crate::scenario::{chsh_event_graph, Scenario};

    #[test]
    fn chsh_examples() {
        assert_eq!(s_chsh(&Behavior::uniform(Scenario::bell_222())).unwrap(), 2.0);
        let t = tsirelson_counterexample();
        assert!((s_chsh(&t).unwrap() - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        let r = verify(&t, &chsh_paradox_spec(), DEFAULT_TOL).unwrap();
        assert!(!r.verified);
        let p11 = t.probability(&"11|00".parse().unwrap()).unwrap();
        assert!((p11 - (3.0 * PI / 8.0).cos().powi(2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn kcbs_arity() {
        assert_eq!(s_kcbs(&[0.0; 5]).unwrap(), 0.0);
        assert!(matches!(s_kcbs(&[0.0; 4]), Err(InequalityError::Arity { .. })));
    }

    #[test]
    fn correlator_examples() {
        let g = chsh_event_graph();
        let zeros: BTreeMap<_, _> = g.vertex_ids().map(|v| (v, 0.0)).collect();
        let r = correlator_inequality_value(&zeros, &g).unwrap();
        assert_eq!((r.value, r.bound, r.closed_form), (12.0, -6.0, Some(12.0)));
        let halves: BTreeMap<_, _> = g.vertex_ids().map(|v| (v, 0.5)).collect();
        assert!(edge_correlators(&halves, &g).unwrap().values().all(|&c| c == -1.0));
        // deterministic point on the independent set {(01|00),(01|01),(01|10)} attains the bound
        let ones = [1usize, 5, 9];
        let det: BTreeMap<_, _> = g.vertex_ids().map(|v| (v, if ones.contains(&v) { 1.0 } else { 0.0 })).collect();
        let r = correlator_inequality_value(&det, &g).unwrap();
        assert_eq!(r.value, -6.0);
        assert!(!r.violated);
    }

    #[test]
    fn non_regular_graph_has_no_closed_form() {
        let path = ExclusivityGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let probs: BTreeMap<_, _> = (0..3).map(|v| (v, 0.0)).collect();
        let r = correlator_inequality_value(&probs, &path).unwrap();
        assert_eq!(r.closed_form, None);
        // S = {0, 2}: deg sum 2, so 2 − 2·2
        assert_eq!(r.bound, -2.0);
    }

    #[test]
    fn spec_bounds() {
        assert_eq!(InequalitySpec::chsh().bound, 3.0);
        assert_eq!(InequalitySpec::kcbs().bound, 2.0);
        assert_eq!(InequalitySpec::chsh_correlator().bound, -6.0);
        let r = InequalitySpec::chsh().evaluate_behavior(&tsirelson_counterexample()).unwrap();
        assert!(r.violated);
        assert_eq!(r.breakdown.len(), 8);
    }

    #[test]
    fn missing_vertex() {
        let g = chsh_event_graph();
        assert!(matches!(edge_correlators(&BTreeMap::new(), &g), Err(InequalityError::MissingVertex(_))));
    }
}
