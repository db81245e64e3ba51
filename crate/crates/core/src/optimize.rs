//! Multistart penalty optimization of paradox positive-sums over small
//! parameterized model families.
//!
//! Each restart draws a random start, runs Nelder–Mead on
//! `−objective + μ Σ r²` for every penalty weight `μ` of the schedule
//! (warm-starting each stage from the previous one), then drives the
//! constraint residuals to zero with minimum-norm Gauss–Newton steps. Only
//! points whose audited residuals are at most [`FEASIBILITY_TOL`] count.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{BellLocalModel, GAUGE_FIXED_PARAMETERS};
use crate::scenario::Event;

/// Audited residuals at or below this make a point feasible.
pub const FEASIBILITY_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
    #[error("precondition unmet: {0}")]
    Precondition(String),
    #[error("parameter vector has length {got}, expected {expected}")]
    ParameterLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Strictly increasing, non-negative. A schedule ending in 0 turns the
    /// constraints off entirely.
    pub penalties: Vec<f64>,
    /// Simplex convergence threshold on objective spread.
    pub tolerance: f64,
    /// Function-evaluation budget per penalty stage.
    pub max_evaluations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            restarts: 200,
            seed: 0,
            penalties: vec![1e1, 1e2, 1e3, 1e4, 1e5, 1e6],
            tolerance: 1e-13,
            max_evaluations: 6000,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let bad = |m: &str| Err(OptimizeError::InvalidConfig(m.into()));
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if self.penalties.is_empty() {
            return bad("penalty schedule is empty");
        }
        if self.penalties.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("penalties must be finite and non-negative");
        }
        if self.penalties.windows(2).any(|w| w[1] <= w[0]) {
            return bad("penalties must be strictly increasing");
        }
        if !(self.tolerance > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.max_evaluations == 0 {
            return bad("evaluation budget must be positive");
        }
        Ok(())
    }

    fn constrained(&self) -> bool {
        *self.penalties.last().unwrap() > 0.0
    }
}

/// What is being maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "task")]
pub enum Task {
    /// `P(00|00)` under the three Hardy zeros, two qubits measured locally.
    HardyLocal,
    /// `P(01|00) + P(01|10)` under the four CHSH-paradox zeros.
    ChshParadoxLocal,
    /// As above without the `P(11|10) = 0` condition.
    ChshParadoxLocalRelaxed,
    /// `Σ |⟨v_i|ψ⟩|²` over five real unit vectors orthogonal along a pentagon.
    Kcbs { dim: usize, constrained: bool },
}

impl Task {
    fn problem(&self) -> Box<dyn Problem> {
        match *self {
            Task::HardyLocal => Box::new(BellProblem::new(&["00|00"], &["00|01", "00|10", "11|11"])),
            Task::ChshParadoxLocal => {
                Box::new(BellProblem::new(&["01|00", "01|10"], &["11|00", "00|01", "11|10", "01|11"]))
            }
            Task::ChshParadoxLocalRelaxed => {
                Box::new(BellProblem::new(&["01|00", "01|10"], &["11|00", "00|01", "01|11"]))
            }
            Task::Kcbs { dim, constrained } => Box::new(KcbsProblem { dim, constrained }),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.problem().dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    CompatibleMeasurements,
    ProductState,
    Violating,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledResidual {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub task: Task,
    /// Best objective among feasible restarts; `None` if no restart was feasible.
    pub best_value: Option<f64>,
    pub best_parameters: Vec<f64>,
    /// Audited residuals at `best_parameters`.
    pub residuals: Vec<LabeledResidual>,
    pub restarts_completed: usize,
    pub feasible_restarts: usize,
    /// Objective after each penalty stage of the winning restart, before polishing.
    pub stage_values: Vec<f64>,
    /// Gauge-fixed two-qubit model at the best point (local Bell tasks only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bell_model: Option<BellLocalModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    /// Classification of every feasible restart optimum (CHSH paradox tasks only).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub classification_counts: BTreeMap<Classification, usize>,
}

impl OptimizationResult {
    pub fn converged(&self) -> bool {
        self.best_value.is_some()
    }
}

/// Forward model: the objective at `params`.
pub fn evaluate(task: Task, params: &[f64]) -> Result<f64, OptimizeError> {
    let p = task.problem();
    if params.len() != p.dim() {
        return Err(OptimizeError::ParameterLength { expected: p.dim(), got: params.len() });
    }
    Ok(p.objective(params))
}

/// Audited residuals at `params`.
pub fn residuals(task: Task, params: &[f64]) -> Result<Vec<LabeledResidual>, OptimizeError> {
    let p = task.problem();
    if params.len() != p.dim() {
        return Err(OptimizeError::ParameterLength { expected: p.dim(), got: params.len() });
    }
    Ok(p.report(params))
}

pub fn maximize_hardy_local(config: &OptimizerConfig) -> Result<OptimizationResult, OptimizeError> {
    maximize(Task::HardyLocal, config)
}

pub fn maximize_chsh_paradox_local(config: &OptimizerConfig) -> Result<OptimizationResult, OptimizeError> {
    maximize(Task::ChshParadoxLocal, config)
}

pub fn maximize_kcbs_qutrit(constrained: bool, config: &OptimizerConfig) -> Result<OptimizationResult, OptimizeError> {
    maximize_kcbs(3, constrained, config)
}

pub fn maximize_kcbs(
    dim: usize,
    constrained: bool,
    config: &OptimizerConfig,
) -> Result<OptimizationResult, OptimizeError> {
    if dim == 0 {
        return Err(OptimizeError::InvalidConfig("dimension must be at least 1".into()));
    }
    maximize(Task::Kcbs { dim, constrained }, config)
}

/// Structural reading of a two-qubit model with `P(11|00) = P(11|10) = 0`:
/// after gauge fixing, either `A1` has the same eigenbasis as `A0`, or
/// `b = d = 0` and the state `a|00⟩ + c|10⟩` is a product.
///
/// `tol` bounds the two zero probabilities; the squared quantities
/// `sin²(θ_A1/2)`, `|b|²`, `|d|²` are compared against `√tol`, since a zero
/// probability of size `tol` only forces a product of two such factors to vanish.
pub fn classify_local_optimum(model: &BellLocalModel, tol: f64) -> Result<Classification, OptimizeError> {
    if !(tol >= 0.0) {
        return Err(OptimizeError::Precondition(format!("tolerance {tol} is not non-negative")));
    }
    let g = model.gauge_fixed();
    let (p1, p2) = (g.probability(1, 1, 0, 0), g.probability(1, 1, 1, 0));
    if p1 > tol || p2 > tol {
        return Err(OptimizeError::Precondition(format!("P(11|00) = {p1:e}, P(11|10) = {p2:e} exceed {tol:e}")));
    }
    let loose = tol.sqrt();
    let [_, b, _, d] = g.amplitudes;
    Ok(if (g.alice[1].theta / 2.0).sin().powi(2) <= loose {
        Classification::CompatibleMeasurements
    } else if b * b <= loose && d * d <= loose {
        Classification::ProductState
    } else {
        Classification::Violating
    })
}

// ---------------------------------------------------------------------------

trait Problem: Sync + Send {
    fn dim(&self) -> usize;
    fn objective(&self, x: &[f64]) -> f64;
    /// Smooth residuals driven to zero by the penalty and the polish.
    fn constraints(&self, x: &[f64]) -> Vec<f64>;
    /// Human-readable residuals used for the feasibility decision.
    fn report(&self, x: &[f64]) -> Vec<LabeledResidual>;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    fn bell_model(&self, _x: &[f64]) -> Option<BellLocalModel> {
        None
    }
    /// Rescale redundant parameters; the objective and constraints must not change.
    fn canonicalize(&self, _x: &mut [f64]) {}
}

struct BellProblem {
    positive: Vec<(u8, u8, u8, u8)>,
    zeros: Vec<(u8, u8, u8, u8)>,
}

impl BellProblem {
    fn new(positive: &[&str], zeros: &[&str]) -> Self {
        let parse =
            |xs: &[&str]| -> Vec<_> { xs.iter().map(|s| s.parse::<Event>().unwrap().as_bell().unwrap()).collect() };
        BellProblem { positive: parse(positive), zeros: parse(zeros) }
    }
}

impl Problem for BellProblem {
    // amplitudes are normalized on use, so their overall scale is free and
    // the simplex can otherwise shrink it towards 0/0
    fn canonicalize(&self, x: &mut [f64]) {
        let n = x[..4].iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 0.0 && n.is_finite() {
            x[..4].iter_mut().for_each(|a| *a /= n);
        }
    }
    fn dim(&self) -> usize {
        GAUGE_FIXED_PARAMETERS
    }

    fn objective(&self, x: &[f64]) -> f64 {
        let m = BellLocalModel::from_parameters(x);
        self.positive.iter().map(|&(a, b, s, t)| m.probability(a, b, s, t)).sum()
    }

    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        let m = BellLocalModel::from_parameters(x);
        self.zeros
            .iter()
            .flat_map(|&(a, b, s, t)| {
                let z = m.amplitude(a, b, s, t);
                [z.re, z.im]
            })
            .collect()
    }

    fn report(&self, x: &[f64]) -> Vec<LabeledResidual> {
        let m = BellLocalModel::from_parameters(x);
        self.zeros
            .iter()
            .map(|&(a, b, s, t)| LabeledResidual {
                label: format!("P({a}{b}|{s}{t})"),
                value: m.probability(a, b, s, t),
            })
            .collect()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut x: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..1.0)).collect();
        x.extend((0..3).map(|_| rng.random_range(0.0..TAU)));
        for _ in 0..2 {
            x.push(rng.random_range(0.0..PI));
            x.push(rng.random_range(0.0..TAU));
        }
        x
    }

    fn bell_model(&self, x: &[f64]) -> Option<BellLocalModel> {
        Some(BellLocalModel::from_parameters(x).gauge_fixed())
    }
}

/// Five unit vectors in `R^dim` given by hyperspherical angles; the handle
/// is the last basis vector. Vertex `i` is adjacent to `i ± 1 (mod 5)`.
struct KcbsProblem {
    dim: usize,
    constrained: bool,
}

/// Unit vector from `dim − 1` hyperspherical angles.
fn unit_from_angles(angles: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(angles.len() + 1);
    let mut s = 1.0;
    for a in angles {
        v.push(s * a.cos());
        s *= a.sin();
    }
    v.push(s);
    v
}

impl KcbsProblem {
    fn vectors(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let k = self.dim - 1;
        (0..5).map(|i| unit_from_angles(&x[i * k..(i + 1) * k])).collect()
    }

    fn probs(vs: &[Vec<f64>]) -> Vec<f64> {
        vs.iter().map(|v| v.last().unwrap().powi(2)).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Problem for KcbsProblem {
    fn dim(&self) -> usize {
        5 * (self.dim - 1)
    }

    fn objective(&self, x: &[f64]) -> f64 {
        Self::probs(&self.vectors(x)).iter().sum()
    }

    fn constraints(&self, x: &[f64]) -> Vec<f64> {
        let vs = self.vectors(x);
        let mut r: Vec<f64> = (0..5).map(|i| dot(&vs[i], &vs[(i + 1) % 5])).collect();
        if self.constrained {
            let p = Self::probs(&vs);
            r.push(p[1] + p[2] - 1.0);
            r.push(p[3] + p[4] - 1.0);
        }
        r
    }

    fn report(&self, x: &[f64]) -> Vec<LabeledResidual> {
        let c = self.constraints(x);
        let mut out: Vec<LabeledResidual> = (0..5)
            .map(|i| LabeledResidual { label: format!("<v{}|v{}>", i + 1, (i + 1) % 5 + 1), value: c[i].abs() })
            .collect();
        if self.constrained {
            out.push(LabeledResidual { label: "|p2 + p3 - 1|".into(), value: c[5].abs() });
            out.push(LabeledResidual { label: "|p4 + p5 - 1|".into(), value: c[6].abs() });
        }
        out
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.dim()).map(|_| rng.random_range(0.0..TAU)).collect()
    }
}

struct Restart {
    value: f64,
    x: Vec<f64>,
    max_residual: f64,
    feasible: bool,
    stage_values: Vec<f64>,
}

/// Runs the multistart optimizer on any task.
pub fn maximize(task: Task, config: &OptimizerConfig) -> Result<OptimizationResult, OptimizeError> {
    config.validate()?;
    let problem = task.problem();
    let problem = problem.as_ref();
    let restarts: Vec<Restart> = (0..config.restarts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(k as u64);
            single_restart(problem, config, &mut rng)
        })
        .collect();
    log::debug!("{task:?}: {} restarts finished", restarts.len());

    // First strictly-better wins, so ties go to the lowest restart index.
    let mut best: Option<usize> = None;
    for (k, r) in restarts.iter().enumerate() {
        if r.feasible && best.is_none_or(|b| r.value > restarts[b].value) {
            best = Some(k);
        }
    }
    let feasible_restarts = restarts.iter().filter(|r| r.feasible).count();
    let pick = best.unwrap_or_else(|| {
        let mut k0 = 0;
        for (k, r) in restarts.iter().enumerate() {
            if r.max_residual < restarts[k0].max_residual {
                k0 = k;
            }
        }
        k0
    });
    let chosen = &restarts[pick];

    let mut classification_counts = BTreeMap::new();
    let chsh_like = matches!(task, Task::ChshParadoxLocal);
    if chsh_like {
        for r in restarts.iter().filter(|r| r.feasible) {
            let m = BellLocalModel::from_parameters(&r.x);
            let c = classify_local_optimum(&m, FEASIBILITY_TOL).expect("feasible points meet the precondition");
            *classification_counts.entry(c).or_insert(0) += 1;
        }
    }
    let bell_model = problem.bell_model(&chosen.x);
    let classification = match (&bell_model, best) {
        (Some(m), Some(_)) if chsh_like => classify_local_optimum(m, FEASIBILITY_TOL).ok(),
        _ => None,
    };
    Ok(OptimizationResult {
        task,
        best_value: best.map(|_| chosen.value),
        best_parameters: chosen.x.clone(),
        residuals: problem.report(&chosen.x),
        restarts_completed: restarts.len(),
        feasible_restarts,
        stage_values: chosen.stage_values.clone(),
        bell_model,
        classification,
        classification_counts,
    })
}

fn single_restart(problem: &dyn Problem, config: &OptimizerConfig, rng: &mut ChaCha8Rng) -> Restart {
    let mut x = problem.sample(rng);
    let mut stage_values = Vec::with_capacity(config.penalties.len());
    let mut step = 0.5;
    for &mu in &config.penalties {
        let f = |y: &[f64]| -problem.objective(y) + mu * problem.constraints(y).iter().map(|r| r * r).sum::<f64>();
        // two passes: a restarted simplex escapes most premature collapses
        for _ in 0..2 {
            x = nelder_mead(&f, &x, step, config.tolerance, config.max_evaluations).0;
            problem.canonicalize(&mut x);
        }
        stage_values.push(problem.objective(&x));
        step = 0.05;
    }
    let constrained = config.constrained();
    if constrained {
        x = polish(problem, &x);
    }
    let max_residual = problem.report(&x).iter().map(|r| r.value).fold(0.0, f64::max);
    Restart {
        value: problem.objective(&x),
        feasible: !constrained || max_residual <= FEASIBILITY_TOL,
        x,
        max_residual,
        stage_values,
    }
}

/// Minimum-norm Gauss–Newton on the constraint residuals, central-difference Jacobian.
fn polish(problem: &dyn Problem, x0: &[f64]) -> Vec<f64> {
    let n = x0.len();
    let mut x = x0.to_vec();
    if n == 0 {
        return x;
    }
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut r = problem.constraints(&x);
    for _ in 0..50 {
        if norm(&r) < 1e-14 {
            break;
        }
        let h = 1e-7;
        let mut jac = DMatrix::zeros(r.len(), n);
        for j in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (rp, rm) = (problem.constraints(&xp), problem.constraints(&xm));
            for i in 0..r.len() {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let Ok(pinv) = jac.pseudo_inverse(1e-10) else { break };
        let dx = pinv * DVector::from_column_slice(&r);
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-4 {
            let cand: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a - t * d).collect();
            let rc = problem.constraints(&cand);
            if norm(&rc) < norm(&r) {
                x = cand;
                r = rc;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    x
}

/// Nelder–Mead with dimension-adaptive coefficients. Returns the best
/// vertex, its value and the number of evaluations.
pub(crate) fn nelder_mead(
    f: &dyn Fn(&[f64]) -> f64,
    x0: &[f64],
    step: f64,
    tol: f64,
    max_evals: usize,
) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    if n == 0 {
        return (Vec::new(), f(x0), 1);
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf);
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = n + 1;
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect() };

    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if (values[n] - values[0]).abs() <= tol * (1.0 + values[0].abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..n).map(|k| simplex[..n].iter().map(|v| v[k]).sum::<f64>() / nf).collect();
        let worst = simplex[n].clone();
        let xr = lerp(&centroid, &worst, -alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < values[0] {
            let xe = lerp(&centroid, &worst, -alpha * beta);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = lerp(&centroid, &xr, gamma);
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc = lerp(&centroid, &worst, gamma);
                let fc = f(&xc);
                (xc, fc)
            };
            evals += 1;
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = lerp(&best, &simplex[i], delta);
                    values[i] = f(&simplex[i]);
                }
                evals += n;
            }
        }
    }
    let k = (0..=n).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap();
    (simplex[k].clone(), values[k], evals)
}
