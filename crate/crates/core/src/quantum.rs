//! Quantum realizations: a handle state with one unit vector per graph
//! vertex, the explicit four-dimensional CHSH-paradox construction, and
//! two-qubit states measured locally.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Behavior;
use crate::classical::enumerate_deterministic;
use crate::graphs::{verify_orthonormal_representation, GraphError, OrthonormalRepresentation};
use crate::scenario::{are_exclusive, chsh_event_graph, Event, ExclusivityGraph, Scenario, VertexId};
use crate::vector::{rational_sqrt, Rational, Scalar, SqrtRational, VectorError};

pub use crate::vector::{ExactVector, StateVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error(transparent)]
    Vector(#[from] VectorError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("invalid two-qubit parameters: {0}")]
    InvalidParameters(String),
}

/// `|⟨vector|state⟩|²`, exact when both inputs are.
pub fn born_probability(state: &StateVector, vector: &StateVector) -> Result<Scalar, QuantumError> {
    Ok(vector.overlap_sq(state)?)
}

/// A handle state plus one unit vector per vertex, orthogonal along every edge.
///
/// `labels` assigns each vertex the index `k` of its dichotomic measurement
/// `A{k}` in the graph-derived contextuality scenario; by default it is the
/// vertex id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct QuantumContextModel {
    graph: ExclusivityGraph,
    vectors: BTreeMap<VertexId, StateVector>,
    handle: StateVector,
    labels: BTreeMap<VertexId, usize>,
}

#[derive(Deserialize)]
struct RawModel {
    graph: ExclusivityGraph,
    vectors: BTreeMap<VertexId, StateVector>,
    handle: StateVector,
    labels: BTreeMap<VertexId, usize>,
}

impl TryFrom<RawModel> for QuantumContextModel {
    type Error = QuantumError;
    fn try_from(raw: RawModel) -> Result<Self, Self::Error> {
        Self::with_labels(raw.graph, raw.vectors, raw.handle, raw.labels)
    }
}

impl QuantumContextModel {
    pub fn new(
        graph: ExclusivityGraph,
        vectors: BTreeMap<VertexId, StateVector>,
        handle: StateVector,
    ) -> Result<Self, QuantumError> {
        let labels = graph.vertex_ids().map(|v| (v, v)).collect();
        Self::with_labels(graph, vectors, handle, labels)
    }

    pub fn with_labels(
        graph: ExclusivityGraph,
        vectors: BTreeMap<VertexId, StateVector>,
        handle: StateVector,
        labels: BTreeMap<VertexId, usize>,
    ) -> Result<Self, QuantumError> {
        let dimension = handle.dim();
        if dimension < 2 {
            return Err(QuantumError::InvalidModel("dimension must be at least 2".into()));
        }
        if handle.norm_residual() > crate::vector::NORM_TOL {
            return Err(QuantumError::InvalidModel("handle is not a unit vector".into()));
        }
        let rep = OrthonormalRepresentation { dimension, vectors, handle: Some(handle) };
        let report = verify_orthonormal_representation(&graph, &rep)?;
        if !report.is_valid() {
            return Err(QuantumError::InvalidModel(format!("{report:?}")));
        }
        if graph.vertex_ids().any(|v| !labels.contains_key(&v)) {
            return Err(QuantumError::InvalidModel("every vertex needs a label".into()));
        }
        let distinct: std::collections::BTreeSet<_> = graph.vertex_ids().map(|v| labels[&v]).collect();
        if distinct.len() != graph.order() {
            return Err(QuantumError::InvalidModel("labels must be distinct".into()));
        }
        let OrthonormalRepresentation { vectors, handle, .. } = rep;
        Ok(QuantumContextModel { graph, vectors, handle: handle.unwrap(), labels })
    }

    pub fn graph(&self) -> &ExclusivityGraph {
        &self.graph
    }

    pub fn handle(&self) -> &StateVector {
        &self.handle
    }

    pub fn dimension(&self) -> usize {
        self.handle.dim()
    }

    pub fn vector(&self, v: VertexId) -> Option<&StateVector> {
        self.vectors.get(&v)
    }

    pub fn label(&self, v: VertexId) -> Option<usize> {
        self.labels.get(&v).copied()
    }

    pub fn vertex_with_label(&self, k: usize) -> Option<VertexId> {
        self.labels.iter().find(|(_, &l)| l == k).map(|(&v, _)| v)
    }

    pub fn representation(&self) -> OrthonormalRepresentation {
        OrthonormalRepresentation {
            dimension: self.dimension(),
            vectors: self.vectors.clone(),
            handle: Some(self.handle.clone()),
        }
    }

    /// The graph with vertices renamed to their labels.
    pub fn labelled_graph(&self) -> ExclusivityGraph {
        self.graph.relabel(&self.labels).expect("labels are a bijection")
    }

    /// One dichotomic measurement `A{label}` per vertex, one context per edge.
    pub fn contextual_scenario(&self) -> Scenario {
        Scenario::contextual(&self.labelled_graph())
    }

    /// Joint statistics of every edge context. Outcome 1 of `A_k` is the
    /// projector onto `v_k`; orthogonality makes `(1,1|i,j)` impossible.
    pub fn contextual_behavior(&self) -> Behavior {
        let p = model_vertex_probabilities(self);
        let by_label: BTreeMap<String, f64> =
            p.iter().map(|(v, s)| (format!("A{}", self.labels[v]), s.value)).collect();
        Behavior::from_fn(self.contextual_scenario(), |e| match e.assignments() {
            [(mi, oi), (mj, oj)] => match (oi, oj) {
                (1, 1) => 0.0,
                (1, 0) => by_label[mi],
                (0, 1) => by_label[mj],
                _ => 1.0 - by_label[mi] - by_label[mj],
            },
            _ => unreachable!("edge contexts have two measurements"),
        })
        .expect("orthogonal projectors give a normalized behavior")
    }
}

/// `p(1|i) = |⟨v_i|ψ⟩|²` for every vertex.
pub fn model_vertex_probabilities(model: &QuantumContextModel) -> BTreeMap<VertexId, Scalar> {
    model
        .vectors
        .iter()
        .map(|(&v, vec)| (v, born_probability(&model.handle, vec).expect("dimensions validated")))
        .collect()
}

/// Vertex → event assignment for the construction vectors `v1..v8`, found
/// by pinned isomorphism search between their orthogonality graph and the
/// CHSH event graph (`v1`, `v8` pinned to the two positive events).
pub const CONSTRUCTION_EVENTS: [&str; 8] = ["01|00", "10|01", "11|11", "01|01", "10|00", "00|11", "10|10", "01|10"];

/// The handle `(1,1,0,0)/√2` and the eight vectors `v1..v8`.
pub fn construction_vectors() -> (StateVector, [StateVector; 8]) {
    let e = |v: &[i64]| StateVector::exact(v).expect("integer vectors normalize themselves");
    let psi = e(&[1, 1, 0, 0]);
    let vs = [
        e(&[0, -1, -2, 1]),
        e(&[1, 0, 0, 0]),
        e(&[0, 1, 0, 0]),
        e(&[0, 2, 1, 1]),
        e(&[3, 1, -1, -1]),
        e(&[2, 0, 1, -1]),
        e(&[1, 3, -1, 1]),
        e(&[1, 0, 2, 1]),
    ];
    (psi, vs)
}

/// The entangled-measurement model of the CHSH paradox on the CHSH event graph.
pub fn chsh_construction() -> QuantumContextModel {
    let graph = chsh_event_graph();
    let (psi, vs) = construction_vectors();
    let mut vectors = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for (k, (ev, v)) in CONSTRUCTION_EVENTS.iter().zip(vs).enumerate() {
        let event: Event = ev.parse().unwrap();
        let id = graph.find_event(&event).expect("construction events lie in the CHSH graph");
        vectors.insert(id, v);
        labels.insert(id, k + 1);
    }
    QuantumContextModel::with_labels(graph, vectors, psi, labels)
        .expect("construction is a valid orthonormal representation")
}

/// Checks `ψ = c₁ v_i + c₂ v_j`: exactly when the coefficients become
/// rational after absorbing the normalizers, otherwise within 1e-12.
pub fn verify_state_decomposition(
    model: &QuantumContextModel,
    pair: (VertexId, VertexId),
    coefficients: (SqrtRational, SqrtRational),
) -> Result<bool, QuantumError> {
    let vi = model.vector(pair.0).ok_or(QuantumError::UnknownVertex(pair.0))?;
    let vj = model.vector(pair.1).ok_or(QuantumError::UnknownVertex(pair.1))?;
    let psi = model.handle();
    if let (Some(p), Some(a), Some(b)) = (psi.as_exact(), vi.as_exact(), vj.as_exact()) {
        let scale = |c: SqrtRational, v: &ExactVector| {
            let sq = c.square * Rational::new(p.den_sq(), v.den_sq());
            rational_sqrt(sq).map(|r| if c.negative { -r } else { r })
        };
        if let (Some(k1), Some(k2)) = (scale(coefficients.0, a), scale(coefficients.1, b)) {
            let ok = p.numerators().iter().zip(a.numerators()).zip(b.numerators()).all(|((z, x), y)| {
                let re = k1 * Rational::from(x.re) + k2 * Rational::from(y.re);
                let im = k1 * Rational::from(x.im) + k2 * Rational::from(y.im);
                re == Rational::from(z.re) && im == Rational::from(z.im)
            });
            return Ok(ok);
        }
    }
    let (c1, c2) = (coefficients.0.to_f64(), coefficients.1.to_f64());
    let (p, a, b) = (psi.amplitudes(), vi.amplitudes(), vj.amplitudes());
    if a.len() != p.len() || b.len() != p.len() {
        return Err(VectorError::DimensionMismatch(p.len(), a.len()).into());
    }
    Ok(p.iter().zip(&a).zip(&b).all(|((z, x), y)| (z - (x * c1 + y * c2)).norm() <= 1e-12))
}

/// True iff the events are pairwise exclusive and every deterministic
/// strategy makes exactly one of them occur.
pub fn ep_cover_check(events: &[Event], scenario: &Scenario) -> bool {
    if events.iter().any(|e| scenario.check_event(e).is_err()) {
        return false;
    }
    for (k, a) in events.iter().enumerate() {
        if events[k + 1..].iter().any(|b| !are_exclusive(a, b)) {
            return false;
        }
    }
    let Ok(strategies) = enumerate_deterministic(scenario) else { return false };
    strategies.iter().all(|s| events.iter().filter(|e| s.occurs(e)).count() == 1)
}

/// Bloch-sphere angles of a qubit ket `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub const ZERO: BlochAngles = BlochAngles { theta: 0.0, phi: 0.0 };

    /// Folds arbitrary reals into `θ ∈ [0, π]`, `φ ∈ [0, 2π)` describing the same ray.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        let mut t = theta.rem_euclid(TAU);
        let mut p = phi;
        if t > PI {
            t = TAU - t;
            p += PI;
        }
        BlochAngles { theta: t, phi: p.rem_euclid(TAU) }
    }

    /// Eigenvector for `outcome`: 0 is the parameterized ket, 1 its orthogonal complement.
    pub fn eigenvector(&self, outcome: u8) -> [Complex64; 2] {
        let (c, s) = ((self.theta / 2.0).cos(), (self.theta / 2.0).sin());
        let e = Complex64::from_polar(1.0, self.phi);
        match outcome {
            0 => [Complex64::new(c, 0.0), e * s],
            _ => [Complex64::new(s, 0.0), -e * c],
        }
    }

    fn from_ket(w: [Complex64; 2]) -> Self {
        let theta = 2.0 * w[1].norm().atan2(w[0].norm());
        let phi = if w[0].norm() < 1e-15 || w[1].norm() < 1e-15 { 0.0 } else { w[1].arg() - w[0].arg() };
        BlochAngles::wrapped(theta, phi)
    }
}

/// A two-qubit state `a|00⟩ + e^{iφb} b|01⟩ + e^{iφc} c|10⟩ + e^{iφd} d|11⟩`
/// with one qubit measurement pair per party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellLocalModel {
    /// `[a, b, c, d]`, non-negative, squares summing to 1.
    pub amplitudes: [f64; 4],
    /// `[φb, φc, φd]`.
    pub phases: [f64; 3],
    pub alice: [BlochAngles; 2],
    pub bob: [BlochAngles; 2],
}

/// Number of free parameters in the gauge-fixed family.
pub const GAUGE_FIXED_PARAMETERS: usize = 11;

impl BellLocalModel {
    pub fn new(
        amplitudes: [f64; 4],
        phases: [f64; 3],
        alice: [BlochAngles; 2],
        bob: [BlochAngles; 2],
    ) -> Result<Self, QuantumError> {
        if amplitudes.iter().any(|&a| !(a >= 0.0)) {
            return Err(QuantumError::InvalidParameters("amplitudes must be non-negative".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(QuantumError::InvalidParameters(format!("|a|²+|b|²+|c|²+|d|² = {norm}")));
        }
        for ang in alice.iter().chain(&bob) {
            if !(0.0..=PI).contains(&ang.theta) || !(0.0..TAU).contains(&ang.phi) {
                return Err(QuantumError::InvalidParameters(format!("angles out of range: {ang:?}")));
            }
        }
        Ok(BellLocalModel { amplitudes, phases, alice, bob })
    }

    /// Maps any point of `R^11` into the gauge-fixed family: first
    /// eigenvectors of `A0` and `B0` pinned to `|0⟩`, global phase on `a`.
    /// Layout: `[a, b, c, d, φb, φc, φd, θA1, φA1, θB1, φB1]`; the amplitude
    /// magnitudes are normalized.
    pub fn from_parameters(x: &[f64]) -> Self {
        assert_eq!(x.len(), GAUGE_FIXED_PARAMETERS);
        let mut amps = [x[0].abs(), x[1].abs(), x[2].abs(), x[3].abs()];
        let n = amps.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n < 1e-300 {
            amps = [1.0, 0.0, 0.0, 0.0];
        } else {
            amps.iter_mut().for_each(|a| *a /= n);
        }
        BellLocalModel {
            amplitudes: amps,
            phases: [x[4].rem_euclid(TAU), x[5].rem_euclid(TAU), x[6].rem_euclid(TAU)],
            alice: [BlochAngles::ZERO, BlochAngles::wrapped(x[7], x[8])],
            bob: [BlochAngles::ZERO, BlochAngles::wrapped(x[9], x[10])],
        }
    }

    pub fn to_parameters(&self) -> Vec<f64> {
        let mut x = self.amplitudes.to_vec();
        x.extend(self.phases);
        x.extend([self.alice[1].theta, self.alice[1].phi, self.bob[1].theta, self.bob[1].phi]);
        x
    }

    /// Amplitudes in the `|00⟩, |01⟩, |10⟩, |11⟩` basis (Alice's qubit first).
    pub fn state(&self) -> [Complex64; 4] {
        let [a, b, c, d] = self.amplitudes;
        let [pb, pc, pd] = self.phases;
        [
            Complex64::new(a, 0.0),
            Complex64::from_polar(b, pb),
            Complex64::from_polar(c, pc),
            Complex64::from_polar(d, pd),
        ]
    }

    pub fn event_vector(&self, a: u8, b: u8, x: u8, y: u8) -> [Complex64; 4] {
        let u = self.alice[x as usize].eigenvector(a);
        let w = self.bob[y as usize].eigenvector(b);
        [u[0] * w[0], u[0] * w[1], u[1] * w[0], u[1] * w[1]]
    }

    /// `⟨e_a^x ⊗ f_b^y | ψ⟩`.
    pub fn amplitude(&self, a: u8, b: u8, x: u8, y: u8) -> Complex64 {
        let v = self.event_vector(a, b, x, y);
        let psi = self.state();
        v.iter().zip(&psi).map(|(p, q)| p.conj() * q).sum()
    }

    pub fn probability(&self, a: u8, b: u8, x: u8, y: u8) -> f64 {
        self.amplitude(a, b, x, y).norm_sqr()
    }

    /// Local unitaries taking the outcome-0 eigenvectors of `A0` and `B0`
    /// to `|0⟩`, followed by removal of the global phase. Statistics are
    /// unchanged.
    pub fn gauge_fixed(&self) -> Self {
        let frame = |k: [Complex64; 2]| [[k[0].conj(), k[1].conj()], [-k[1], k[0]]];
        let apply = |u: &[[Complex64; 2]; 2], v: [Complex64; 2]| {
            [u[0][0] * v[0] + u[0][1] * v[1], u[1][0] * v[0] + u[1][1] * v[1]]
        };
        let ua = frame(self.alice[0].eigenvector(0));
        let ub = frame(self.bob[0].eigenvector(0));
        let psi = self.state();
        let mut out = [Complex64::zero(); 4];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[2 * i + j] += ua[i][k] * ub[j][l] * psi[2 * k + l];
                    }
                }
            }
        }
        let g = if out[0].norm() > 1e-15 { out[0].arg() } else { 0.0 };
        let rot = Complex64::from_polar(1.0, -g);
        let out: Vec<Complex64> = out.iter().map(|z| z * rot).collect();
        BellLocalModel {
            amplitudes: [out[0].norm(), out[1].norm(), out[2].norm(), out[3].norm()],
            phases: [out[1].arg().rem_euclid(TAU), out[2].arg().rem_euclid(TAU), out[3].arg().rem_euclid(TAU)],
            alice: [BlochAngles::ZERO, BlochAngles::from_ket(apply(&ua, self.alice[1].eigenvector(0)))],
            bob: [BlochAngles::ZERO, BlochAngles::from_ket(apply(&ub, self.bob[1].eigenvector(0)))],
        }
    }
}

/// The 16-event behavior `P(ab|xy) = |⟨e_a^x ⊗ f_b^y|ψ⟩|²`.
pub fn bell_local_behavior(model: &BellLocalModel) -> Behavior {
    Behavior::from_fn(Scenario::bell_222(), |e| {
        let (a, b, x, y) = e.as_bell().expect("2-2-2 events are bipartite");
        model.probability(a, b, x, y)
    })
    .expect("Born-rule statistics are normalized")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn born_examples() {
        let (psi, vs) = construction_vectors();
        assert_eq!(born_probability(&psi, &vs[0]).unwrap().exact, Some(r(1, 12)));
        assert_eq!(born_probability(&vs[1], &vs[2]).unwrap().exact, Some(r(0, 1)));
        assert_eq!(born_probability(&psi, &psi).unwrap().exact, Some(r(1, 1)));
        let bad = StateVector::basis(3, 0);
        assert!(matches!(born_probability(&psi, &bad), Err(QuantumError::Vector(VectorError::DimensionMismatch(..)))));
    }

    #[test]
    fn construction_probabilities() {
        let m = chsh_construction();
        let p = model_vertex_probabilities(&m);
        let by_label = |k| p[&m.vertex_with_label(k).unwrap()].exact.unwrap();
        assert_eq!(by_label(1) + by_label(8), r(1, 6));
        assert_eq!(by_label(2) + by_label(3), r(1, 1));
        assert_eq!((by_label(4), by_label(5)), (r(1, 3), r(2, 3)));
        assert_eq!(by_label(6) + by_label(7), r(1, 1));
    }

    #[test]
    fn decompositions() {
        let m = chsh_construction();
        let v = |k| m.vertex_with_label(k).unwrap();
        let half = SqrtRational::sqrt_of(1, 2);
        assert!(verify_state_decomposition(&m, (v(2), v(3)), (half, half)).unwrap());
        let (third, two_thirds) = (SqrtRational::sqrt_of(1, 3), SqrtRational::sqrt_of(2, 3));
        assert!(verify_state_decomposition(&m, (v(4), v(5)), (third, two_thirds)).unwrap());
        assert!(verify_state_decomposition(&m, (v(6), v(7)), (third, two_thirds)).unwrap());
        let one = SqrtRational::sqrt_of(1, 1);
        let zero = SqrtRational::sqrt_of(0, 1);
        assert!(!verify_state_decomposition(&m, (v(2), v(3)), (one, zero)).unwrap());
        // irrational after normalization: float path
        let odd = SqrtRational::sqrt_of(1, 5);
        assert!(!verify_state_decomposition(&m, (v(2), v(3)), (odd, odd)).unwrap());
    }

    #[test]
    fn ep_cover_examples() {
        let s = Scenario::bell_222();
        let ev = |xs: &[&str]| xs.iter().map(|x| x.parse().unwrap()).collect::<Vec<Event>>();
        assert!(ep_cover_check(&ev(&["00|01", "10|01", "01|11", "11|11"]), &s));
        assert!(ep_cover_check(&ev(&["11|10", "01|11", "00|11", "10|10"]), &s));
        assert!(!ep_cover_check(&ev(&["11|10", "01|11", "00|11", "01|10"]), &s));
        assert!(!ep_cover_check(&ev(&["00|00", "11|11"]), &s));
    }

    #[test]
    fn product_state_in_computational_basis() {
        let m = BellLocalModel::new([1.0, 0.0, 0.0, 0.0], [0.0; 3], [BlochAngles::ZERO; 2], [BlochAngles::ZERO; 2])
            .unwrap();
        let b = bell_local_behavior(&m);
        for xy in ["00", "01", "10", "11"] {
            assert!((b.probability(&format!("00|{xy}").parse().unwrap()).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn singlet_is_anticorrelated() {
        let s = FRAC_1_SQRT_2;
        let dir = BlochAngles { theta: 1.1, phi: 0.4 };
        let m = BellLocalModel::new([0.0, s, s, 0.0], [0.0, PI, 0.0], [dir; 2], [dir; 2]).unwrap();
        for (x, y) in [(0, 0), (1, 1)] {
            assert!(m.probability(0, 0, x, y) < 1e-15);
            assert!(m.probability(1, 1, x, y) < 1e-15);
        }
    }

    #[test]
    fn gauge_fixing_preserves_statistics() {
        let m = BellLocalModel::new(
            [0.3, 0.5, 0.1, (1.0f64 - 0.09 - 0.25 - 0.01).sqrt()],
            [0.2, 1.3, 4.0],
            [BlochAngles { theta: 0.7, phi: 2.0 }, BlochAngles { theta: 2.1, phi: 5.0 }],
            [BlochAngles { theta: 1.7, phi: 0.3 }, BlochAngles { theta: 0.4, phi: 3.3 }],
        )
        .unwrap();
        let g = m.gauge_fixed();
        assert_eq!(g.alice[0], BlochAngles::ZERO);
        for e in crate::scenario::enumerate_events(&Scenario::bell_222()) {
            let (a, b, x, y) = e.as_bell().unwrap();
            assert!((m.probability(a, b, x, y) - g.probability(a, b, x, y)).abs() < 1e-12, "{e}");
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(BellLocalModel::new([1.0, 1.0, 0.0, 0.0], [0.0; 3], [BlochAngles::ZERO; 2], [BlochAngles::ZERO; 2])
            .is_err());
        let bad = BlochAngles { theta: 4.0, phi: 0.0 };
        assert!(BellLocalModel::new([1.0, 0.0, 0.0, 0.0], [0.0; 3], [bad; 2], [BlochAngles::ZERO; 2]).is_err());
    }
}
