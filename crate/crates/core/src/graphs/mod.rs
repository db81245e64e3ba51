//! Graph invariants that bound classical and quantum values of event sums:
//! independence number, Lovász number, odd holes and orthonormal
//! representations.

mod iso;
mod theta;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{ExclusivityGraph, Vertex, VertexId};
use crate::vector::{Scalar, StateVector, VectorError};

pub use iso::{find_vertex_event_mapping, find_vertex_event_mapping_pinned, is_isomorphism};
pub use theta::{lovasz_theta, ThetaResult, MAX_THETA_VERTICES, MIN_ACCURACY};

pub const MAX_SEARCH_VERTICES: usize = 32;
/// Orthogonality tolerance for float representations.
pub const FLOAT_ORTHOGONALITY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph has {order} vertices, limit is {limit}")]
    TooLarge { order: usize, limit: usize },
    #[error("accuracy {0} is below the supported minimum")]
    InvalidAccuracy(f64),
    #[error("SDP did not converge; best bounds [{lower}, {upper}]")]
    NotConverged { lower: f64, upper: f64 },
    #[error("hole length must be odd and at least 5, got {0}")]
    InvalidHoleLength(usize),
    #[error("no vector for vertex {0}")]
    MissingVector(VertexId),
    #[error("representation has no handle")]
    MissingHandle,
    #[error("invalid orthonormal representation: {0}")]
    InvalidRepresentation(String),
    #[error(transparent)]
    Vector(#[from] VectorError),
}

fn check_search_size(graph: &ExclusivityGraph) -> Result<(), GraphError> {
    if graph.order() > MAX_SEARCH_VERTICES {
        return Err(GraphError::TooLarge { order: graph.order(), limit: MAX_SEARCH_VERTICES });
    }
    Ok(())
}

/// Maximum-size independent set, ignoring weights.
pub fn independence_number(graph: &ExclusivityGraph) -> Result<(usize, Vec<VertexId>), GraphError> {
    let (_, witness) = max_weight_independent_set(graph, &vec![1.0; graph.order()])?;
    Ok((witness.len(), witness))
}

/// Maximum total weight of an independent set, using the vertex weights.
pub fn weighted_independence_number(graph: &ExclusivityGraph) -> Result<(f64, Vec<VertexId>), GraphError> {
    max_weight_independent_set(graph, &graph.weights())
}

fn max_weight_independent_set(graph: &ExclusivityGraph, weights: &[f64]) -> Result<(f64, Vec<VertexId>), GraphError> {
    check_search_size(graph)?;
    let adj = graph.adjacency_masks();
    let all = if graph.order() == 64 { u64::MAX } else { (1u64 << graph.order()) - 1 };
    let mut search = Mis { adj: &adj, weights, best_weight: -1.0, best_set: 0 };
    search.branch(all, 0.0, 0);
    let witness =
        graph.vertices().iter().enumerate().filter(|(p, _)| search.best_set >> p & 1 == 1).map(|(_, v)| v.id).collect();
    Ok((search.best_weight.max(0.0), witness))
}

struct Mis<'a> {
    adj: &'a [u64],
    weights: &'a [f64],
    best_weight: f64,
    best_set: u64,
}

impl Mis<'_> {
    /// Greedy clique cover of `cand`; an independent set takes at most one
    /// vertex from each clique, so the sum of per-clique maxima bounds it.
    fn bound(&self, mut cand: u64) -> f64 {
        let mut total = 0.0;
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            let mut clique_cand = cand & self.adj[v];
            let mut heaviest = self.weights[v];
            cand &= !(1 << v);
            while clique_cand != 0 {
                let u = clique_cand.trailing_zeros() as usize;
                heaviest = heaviest.max(self.weights[u]);
                clique_cand &= self.adj[u];
                cand &= !(1 << u);
            }
            total += heaviest;
        }
        total
    }

    fn branch(&mut self, cand: u64, weight: f64, set: u64) {
        if cand == 0 {
            if weight > self.best_weight + 1e-12 {
                self.best_weight = weight;
                self.best_set = set;
            }
            return;
        }
        if weight + self.bound(cand) <= self.best_weight + 1e-12 {
            return;
        }
        let v = cand.trailing_zeros() as usize;
        self.branch(cand & !self.adj[v] & !(1 << v), weight + self.weights[v], set | 1 << v);
        self.branch(cand & !(1 << v), weight, set);
    }
}

/// Same vertices (events and weights kept), complementary edge set.
pub fn complement(graph: &ExclusivityGraph) -> ExclusivityGraph {
    let ids: Vec<VertexId> = graph.vertex_ids().collect();
    let mut edges = Vec::new();
    for (k, &a) in ids.iter().enumerate() {
        for &b in &ids[k + 1..] {
            if !graph.is_adjacent(a, b) {
                edges.push((a, b));
            }
        }
    }
    ExclusivityGraph::new(graph.vertices().to_vec(), edges).expect("complement of a valid graph")
}

/// All induced chordless cycles of the given odd length, each reported once,
/// starting at its smallest vertex and oriented so the second vertex is
/// smaller than the last.
pub fn find_odd_holes(graph: &ExclusivityGraph, length: usize) -> Result<Vec<Vec<VertexId>>, GraphError> {
    if length < 5 || length.is_multiple_of(2) {
        return Err(GraphError::InvalidHoleLength(length));
    }
    check_search_size(graph)?;
    let adj = graph.adjacency_masks();
    let n = graph.order();
    let mut holes = Vec::new();
    let mut path = Vec::with_capacity(length);
    for start in 0..n {
        path.clear();
        path.push(start);
        extend_hole(&adj, length, &mut path, &mut holes);
    }
    let ids: Vec<VertexId> = graph.vertex_ids().collect();
    Ok(holes.into_iter().map(|h: Vec<usize>| h.into_iter().map(|p| ids[p]).collect()).collect())
}

fn extend_hole(adj: &[u64], length: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let start = path[0];
    let last = *path.last().unwrap();
    let interior: u64 = if path.len() > 2 { path[1..path.len() - 1].iter().fold(0, |m, &p| m | 1 << p) } else { 0 };
    let closing = path.len() + 1 == length;
    let mut cand = adj[last] & !interior;
    while cand != 0 {
        let w = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        if w <= start || path.contains(&w) {
            continue;
        }
        // chordless: w may only touch `last`, plus `start` when it closes the cycle
        if adj[w] & interior != 0 {
            continue;
        }
        let touches_start = adj[w] >> start & 1 == 1;
        if path.len() > 1 && touches_start != closing {
            continue;
        }
        if path.len() == 1 && closing {
            continue;
        }
        path.push(w);
        if closing {
            if path[1] < w {
                out.push(path.clone());
            }
        } else {
            extend_hole(adj, length, path, out);
        }
        path.pop();
    }
}

/// Unit vectors per vertex (adjacent vertices orthogonal) and an optional handle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthonormalRepresentation {
    pub dimension: usize,
    pub vectors: BTreeMap<VertexId, StateVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub handle: Option<StateVector>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RepresentationReport {
    /// Vertices whose vector is off unit norm, with `|‖v‖² − 1|`.
    pub norm_violations: Vec<(VertexId, f64)>,
    /// Edges whose vectors are not orthogonal, with `|⟨v_i|v_j⟩|`.
    pub edge_violations: Vec<((VertexId, VertexId), f64)>,
    pub dimension_mismatches: Vec<VertexId>,
    /// True when every edge was checked in exact arithmetic.
    pub exact: bool,
}

impl RepresentationReport {
    pub fn is_valid(&self) -> bool {
        self.norm_violations.is_empty() && self.edge_violations.is_empty() && self.dimension_mismatches.is_empty()
    }
}

pub fn verify_orthonormal_representation(
    graph: &ExclusivityGraph,
    rep: &OrthonormalRepresentation,
) -> Result<RepresentationReport, GraphError> {
    let mut report = RepresentationReport { exact: true, ..Default::default() };
    for id in graph.vertex_ids() {
        let v = rep.vectors.get(&id).ok_or(GraphError::MissingVector(id))?;
        if v.dim() != rep.dimension {
            report.dimension_mismatches.push(id);
            continue;
        }
        let r = v.norm_residual();
        if r > crate::vector::NORM_TOL {
            report.norm_violations.push((id, r));
        }
    }
    if !report.dimension_mismatches.is_empty() {
        return Ok(report);
    }
    for &(a, b) in graph.edges() {
        let (va, vb) = (&rep.vectors[&a], &rep.vectors[&b]);
        report.exact &= va.is_exact() && vb.is_exact();
        if !va.is_orthogonal_to(vb, FLOAT_ORTHOGONALITY_TOL)? {
            report.edge_violations.push(((a, b), va.inner(vb)?.norm()));
        }
    }
    Ok(report)
}

/// `Σ_i |⟨v_i|ψ⟩|²` for a valid representation with handle `ψ`.
pub fn theta_lower_bound(graph: &ExclusivityGraph, rep: &OrthonormalRepresentation) -> Result<Scalar, GraphError> {
    let report = verify_orthonormal_representation(graph, rep)?;
    if !report.is_valid() {
        return Err(GraphError::InvalidRepresentation(format!(
            "{} norm and {} orthogonality violations",
            report.norm_violations.len(),
            report.edge_violations.len()
        )));
    }
    let handle = rep.handle.as_ref().ok_or(GraphError::MissingHandle)?;
    if handle.norm_residual() > crate::vector::NORM_TOL {
        return Err(GraphError::InvalidRepresentation("handle is not a unit vector".into()));
    }
    let mut total = Scalar::zero();
    for id in graph.vertex_ids() {
        total = total + rep.vectors[&id].overlap_sq(handle)?;
    }
    Ok(total)
}

/// The graph whose edges join orthogonal pairs of `vectors`.
pub fn orthogonality_graph(vectors: &BTreeMap<VertexId, StateVector>) -> Result<ExclusivityGraph, GraphError> {
    let ids: Vec<VertexId> = vectors.keys().copied().collect();
    let mut edges = Vec::new();
    for (k, &a) in ids.iter().enumerate() {
        for &b in &ids[k + 1..] {
            if vectors[&a].is_orthogonal_to(&vectors[&b], FLOAT_ORTHOGONALITY_TOL)? {
                edges.push((a, b));
            }
        }
    }
    let vertices = ids.iter().map(|&id| Vertex { id, event: None, weight: 1.0 }).collect();
    Ok(ExclusivityGraph::new(vertices, edges).expect("ids are distinct"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_exclusivity_graph, chsh_event_graph, vertices_of, Scenario};

    #[test]
    fn alpha_examples() {
        assert_eq!(independence_number(&ExclusivityGraph::cycle(5)).unwrap().0, 2);
        assert_eq!(independence_number(&ExclusivityGraph::edgeless(7)).unwrap().0, 7);
        assert_eq!(independence_number(&ExclusivityGraph::complete(6)).unwrap().0, 1);
        let g = chsh_event_graph();
        let (alpha, witness) = independence_number(&g).unwrap();
        assert_eq!(alpha, 3);
        let shown: Vec<String> =
            witness.iter().map(|&v| g.vertex(v).unwrap().event.as_ref().unwrap().to_string()).collect();
        assert_eq!(shown, ["(01|00)", "(01|01)", "(01|10)"]);
    }

    #[test]
    fn weighted_alpha() {
        let mut w = BTreeMap::new();
        w.insert(0, 5.0);
        let g = ExclusivityGraph::cycle(5).with_weights(&w).unwrap();
        let (value, witness) = weighted_independence_number(&g).unwrap();
        assert_eq!(value, 6.0);
        assert_eq!(witness, vec![0, 2]);
    }

    #[test]
    fn too_large_graph_is_rejected() {
        let g = ExclusivityGraph::edgeless(33);
        assert!(matches!(independence_number(&g), Err(GraphError::TooLarge { .. })));
    }

    #[test]
    fn complement_examples() {
        let c5 = ExclusivityGraph::cycle(5);
        let cc = complement(&c5);
        assert_eq!(cc.size(), 5);
        assert!(find_vertex_event_mapping(&c5, &cc).is_some());
        assert_eq!(complement(&ExclusivityGraph::complete(4)).size(), 0);
        let g = chsh_event_graph();
        let gc = complement(&g);
        assert_eq!((gc.size(), gc.regular_degree()), (16, Some(4)));
        assert_eq!(complement(&gc), g);
    }

    #[test]
    fn odd_holes() {
        assert!(find_odd_holes(&ExclusivityGraph::cycle(4), 5).unwrap().is_empty());
        assert_eq!(find_odd_holes(&ExclusivityGraph::cycle(5), 5).unwrap(), vec![vec![0, 1, 2, 3, 4]]);
        assert_eq!(find_odd_holes(&ExclusivityGraph::cycle(7), 7).unwrap().len(), 1);
        assert!(find_odd_holes(&ExclusivityGraph::cycle(7), 5).unwrap().is_empty());
        assert!(find_odd_holes(&ExclusivityGraph::complete(6), 5).unwrap().is_empty());
        assert_eq!(find_odd_holes(&ExclusivityGraph::cycle(5), 4), Err(GraphError::InvalidHoleLength(4)));

        let full = build_exclusivity_graph(&Scenario::bell_222());
        let mut pent = vertices_of(&full, &crate::scenario::hardy_pentagon_events()).unwrap();
        pent.sort();
        let holes = find_odd_holes(&full, 5).unwrap();
        assert!(holes.iter().any(|h| {
            let mut s = h.clone();
            s.sort();
            s == pent
        }));
    }

    #[test]
    fn chsh_graph_is_covered_by_two_pentagons() {
        let g = chsh_event_graph();
        let holes = find_odd_holes(&g, 5).unwrap();
        let all: u64 = g.vertex_ids().fold(0, |m, v| m | 1 << v);
        let mask = |h: &Vec<VertexId>| h.iter().fold(0u64, |m, &v| m | 1 << v);
        let covering = holes.iter().enumerate().any(|(i, a)| holes[i + 1..].iter().any(|b| mask(a) | mask(b) == all));
        assert!(covering, "holes: {holes:?}");
    }

    #[test]
    fn standard_basis_on_edgeless_graph_is_valid() {
        let g = ExclusivityGraph::edgeless(3);
        let vectors = (0..3).map(|k| (k, StateVector::basis(3, k))).collect();
        let rep = OrthonormalRepresentation { dimension: 3, vectors, handle: Some(StateVector::basis(3, 1)) };
        assert!(verify_orthonormal_representation(&g, &rep).unwrap().is_valid());
        assert_eq!(theta_lower_bound(&g, &rep).unwrap().value, 1.0);
    }

    #[test]
    fn missing_vector_is_an_error() {
        let g = ExclusivityGraph::edgeless(2);
        let rep = OrthonormalRepresentation { dimension: 2, vectors: BTreeMap::new(), handle: None };
        assert_eq!(verify_orthonormal_representation(&g, &rep), Err(GraphError::MissingVector(0)));
    }

    #[test]
    fn orthogonal_handle_gives_zero() {
        let g = ExclusivityGraph::from_edges(2, [(0, 1)]).unwrap();
        let vectors = (0..2).map(|k| (k, StateVector::basis(3, k))).collect();
        let rep = OrthonormalRepresentation { dimension: 3, vectors, handle: Some(StateVector::basis(3, 2)) };
        assert_eq!(theta_lower_bound(&g, &rep).unwrap().value, 0.0);
    }
}
