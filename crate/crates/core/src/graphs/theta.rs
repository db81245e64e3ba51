//! Lovász number by a primal-dual interior-point method.
//!
//! Primal: maximize `⟨√w√wᵀ, X⟩` subject to `tr X = 1`, `X_ij = 0` on every
//! edge, `X ⪰ 0`. Dual: minimize `t` subject to
//! `t·I + Σ_e y_e E_e − √w√wᵀ ⪰ 0`. Both start strictly feasible
//! (`X = I/n`, `t = Σw + 1`), and Newton steps keep the linear constraints,
//! so every iterate yields a valid lower and upper bound.
//!
//! Search direction is HKM with a Mehrotra predictor-corrector.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::GraphError;
use crate::scenario::ExclusivityGraph;

pub const MAX_THETA_VERTICES: usize = 16;
pub const MIN_ACCURACY: f64 = 1e-7;
const MAX_ITERATIONS: usize = 200;
const STEP_FRACTION: f64 = 0.95;
const FEASIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaResult {
    /// Midpoint of the final bounds.
    pub value: f64,
    /// Primal objective `⟨W, X⟩`.
    pub lower: f64,
    /// Dual objective `t`.
    pub upper: f64,
    pub duality_gap: f64,
    pub iterations: usize,
    /// Optimal Gram matrix `X`, row-major.
    pub primal_certificate: Vec<Vec<f64>>,
}

impl ThetaResult {
    pub fn certificate(&self) -> DMatrix<f64> {
        let n = self.primal_certificate.len();
        DMatrix::from_fn(n, n, |i, j| self.primal_certificate[i][j])
    }
}

#[derive(Clone, Copy)]
enum Constraint {
    Trace,
    Edge(usize, usize),
}

impl Constraint {
    /// `⟨A, M⟩`.
    fn apply(&self, m: &DMatrix<f64>) -> f64 {
        match *self {
            Constraint::Trace => m.trace(),
            Constraint::Edge(i, j) => m[(i, j)] + m[(j, i)],
        }
    }

    fn add_scaled(&self, target: &mut DMatrix<f64>, s: f64) {
        match *self {
            Constraint::Trace => {
                for k in 0..target.nrows() {
                    target[(k, k)] += s;
                }
            }
            Constraint::Edge(i, j) => {
                target[(i, j)] += s;
                target[(j, i)] += s;
            }
        }
    }

    /// `X · A · Zi`.
    fn sandwich(&self, x: &DMatrix<f64>, zi: &DMatrix<f64>) -> DMatrix<f64> {
        match *self {
            Constraint::Trace => x * zi,
            Constraint::Edge(i, j) => {
                let n = x.nrows();
                DMatrix::from_fn(n, n, |r, c| x[(r, i)] * zi[(j, c)] + x[(r, j)] * zi[(i, c)])
            }
        }
    }
}

struct Problem {
    n: usize,
    c: DMatrix<f64>,
    cons: Vec<Constraint>,
    b: DVector<f64>,
}

impl Problem {
    fn op(&self, m: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.cons.len(), self.cons.iter().map(|a| a.apply(m)))
    }

    fn adj(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for (a, &v) in self.cons.iter().zip(y.iter()) {
            a.add_scaled(&mut out, v);
        }
        out
    }

    /// Solves the HKM Newton system for complementarity right-hand side `rc`.
    fn direction(
        &self,
        x: &DMatrix<f64>,
        zi: &DMatrix<f64>,
        schur: &nalgebra::Cholesky<f64, nalgebra::Dyn>,
        rp: &DVector<f64>,
        rd: &DMatrix<f64>,
        rc: &DMatrix<f64>,
    ) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
        let rhs = rp - self.op(&(rc * zi - x * rd * zi));
        let dy = schur.solve(&rhs);
        let dz = rd - self.adj(&dy);
        let dx = (rc - x * &dz) * zi;
        let dx = (&dx + dx.transpose()) * 0.5;
        (dx, dy, dz)
    }
}

fn sym_max_step(m: &DMatrix<f64>, dm: &DMatrix<f64>) -> Option<f64> {
    let l = m.clone().cholesky()?.l();
    let li = l.try_inverse()?;
    let s = &li * dm * li.transpose();
    let s = (&s + s.transpose()) * 0.5;
    let lmin = s.symmetric_eigenvalues().min();
    Some(if lmin >= 0.0 { f64::INFINITY } else { -1.0 / lmin })
}

pub fn lovasz_theta(graph: &ExclusivityGraph, accuracy: f64) -> Result<ThetaResult, GraphError> {
    let n = graph.order();
    if n > MAX_THETA_VERTICES {
        return Err(GraphError::TooLarge { order: n, limit: MAX_THETA_VERTICES });
    }
    if !(accuracy >= MIN_ACCURACY) {
        return Err(GraphError::InvalidAccuracy(accuracy));
    }
    if n == 0 {
        return Ok(ThetaResult {
            value: 0.0,
            lower: 0.0,
            upper: 0.0,
            duality_gap: 0.0,
            iterations: 0,
            primal_certificate: vec![],
        });
    }

    let sw: Vec<f64> = graph.weights().iter().map(|w| w.sqrt()).collect();
    let total_weight: f64 = graph.weights().iter().sum();
    let c = DMatrix::from_fn(n, n, |i, j| -sw[i] * sw[j]);
    let mut cons = vec![Constraint::Trace];
    for &(a, b) in graph.edges() {
        let (i, j) = (graph.position(a).unwrap(), graph.position(b).unwrap());
        cons.push(Constraint::Edge(i, j));
    }
    let mut b = DVector::zeros(cons.len());
    b[0] = 1.0;
    let p = Problem { n, c, cons, b };

    let mut x = DMatrix::<f64>::identity(n, n) / n as f64;
    let mut y = DVector::<f64>::zeros(p.cons.len());
    y[0] = -(total_weight + 1.0);
    let mut z = &p.c - p.adj(&y);

    let mut best: Option<(f64, f64, usize)> = None;
    for iter in 1..=MAX_ITERATIONS {
        let rp = &p.b - p.op(&x);
        let rd = &p.c - &z - p.adj(&y);
        let pobj = p.c.dot(&x);
        let dobj = p.b.dot(&y);
        let (lower, upper) = (-pobj, -dobj);
        best = Some((lower, upper, iter));
        let gap = upper - lower;
        let feasible = rp.amax() <= FEASIBILITY_TOL && rd.amax() <= FEASIBILITY_TOL;
        if feasible && gap.abs() <= accuracy * 0.01 {
            return Ok(finish(x, lower, upper, iter));
        }

        let mu = x.dot(&z) / n as f64;
        let Some(zi) = z.clone().cholesky().map(|ch| ch.inverse()) else { break };
        let m = p.cons.len();
        let mut schur = DMatrix::zeros(m, m);
        for (l, al) in p.cons.iter().enumerate() {
            let s = al.sandwich(&x, &zi);
            for (k, ak) in p.cons.iter().enumerate() {
                schur[(k, l)] = ak.apply(&s);
            }
        }
        let schur = (&schur + schur.transpose()) * 0.5;
        let Some(schur) = schur.cholesky() else { break };

        let xz = &x * &z;
        let rc_aff = -&xz;
        let (dxa, _, dza) = p.direction(&x, &zi, &schur, &rp, &rd, &rc_aff);
        let (Some(ap), Some(ad)) = (sym_max_step(&x, &dxa), sym_max_step(&z, &dza)) else { break };
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mu_aff = (&x + &dxa * ap).dot(&(&z + &dza * ad)) / n as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let rc = DMatrix::<f64>::identity(n, n) * (sigma * mu) - &xz - &dxa * &dza;
        let (dx, dy, dz) = p.direction(&x, &zi, &schur, &rp, &rd, &rc);
        let (Some(ap), Some(ad)) = (sym_max_step(&x, &dx), sym_max_step(&z, &dz)) else { break };
        let ap = (STEP_FRACTION * ap).min(1.0);
        let ad = (STEP_FRACTION * ad).min(1.0);
        x += &dx * ap;
        x = (&x + x.transpose()) * 0.5;
        y += &dy * ad;
        z += &dz * ad;
        z = (&z + z.transpose()) * 0.5;
    }
    let (lower, upper, iterations) = best.unwrap_or((f64::NAN, f64::NAN, 0));
    if upper - lower <= accuracy {
        return Ok(finish(x, lower, upper, iterations));
    }
    Err(GraphError::NotConverged { lower, upper })
}

fn finish(x: DMatrix<f64>, lower: f64, upper: f64, iterations: usize) -> ThetaResult {
    let n = x.nrows();
    ThetaResult {
        value: 0.5 * (lower + upper),
        lower,
        upper,
        duality_gap: (upper - lower).max(0.0),
        iterations,
        primal_certificate: (0..n).map(|i| (0..n).map(|j| x[(i, j)]).collect()).collect(),
    }
}
