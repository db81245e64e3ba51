use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context as _};
use exclusivity::classical::classical_paradox_max;
use exclusivity::graphs::{find_odd_holes, independence_number, lovasz_theta, MAX_THETA_VERTICES, MIN_ACCURACY};
use exclusivity::inequalities::{correlator_sum_exact, InequalityKind, InequalitySpec};
use exclusivity::optimize::{maximize, OptimizationResult, OptimizerConfig, Task};
use exclusivity::paradox::{
    chsh_paradox_spec, contextual_chsh_paradox_spec, contextual_chsh_scenario, verify as verify_paradox,
};
use exclusivity::quantum::{chsh_construction, model_vertex_probabilities};
use exclusivity::vector::Scalar;
use exclusivity::{ExclusivityGraph, Scenario};
use log::info;
use serde_json::{json, Value};

use crate::builtins;
use crate::report::{Context, NonConvergence, Outcome};

/// Longest odd hole searched for by `graph`.
const MAX_HOLE_LENGTH: usize = 9;

fn ok(results: Value, text: String) -> anyhow::Result<Outcome> {
    Ok(Outcome { results, text, converged: true })
}

fn ids(vs: &[usize]) -> String {
    vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

pub fn graph(ctx: &mut Context, input: &str) -> anyhow::Result<Outcome> {
    let g = builtins::graph(ctx, input)?;
    let (alpha, witness) = independence_number(&g)?;
    let theta = if g.order() <= MAX_THETA_VERTICES {
        info!("solving the theta SDP on {} vertices", g.order());
        Some(lovasz_theta(&g, MIN_ACCURACY)?)
    } else {
        None
    };
    let mut holes = BTreeMap::new();
    for len in (5..=g.order().min(MAX_HOLE_LENGTH)).step_by(2) {
        holes.insert(len.to_string(), find_odd_holes(&g, len)?);
    }

    let mut text = format!("graph {input}: {} vertices, {} edges", g.order(), g.size());
    if let Some(d) = g.regular_degree() {
        let _ = write!(text, ", {d}-regular");
    }
    let _ = writeln!(text, "\nα = {alpha}  (independent set {{{}}})", ids(&witness));
    match &theta {
        Some(t) => {
            let _ = writeln!(
                text,
                "ϑ = {:.8}  (bounds [{:.8}, {:.8}], {} iterations)",
                t.value, t.lower, t.upper, t.iterations
            );
        }
        None => {
            let _ = writeln!(text, "ϑ not computed: more than {MAX_THETA_VERTICES} vertices");
        }
    }
    for (len, hs) in &holes {
        let _ = writeln!(text, "odd holes of length {len}: {}", hs.len());
    }
    let results = json!({
        "input": input,
        "order": g.order(),
        "size": g.size(),
        "regular_degree": g.regular_degree(),
        "alpha": alpha,
        "independent_set": witness,
        "theta": theta,
        "odd_holes": holes,
        "graph": g,
    });
    ok(results, text)
}

pub fn verify(ctx: &mut Context, behavior: &str, spec: &str) -> anyhow::Result<Outcome> {
    let loaded = builtins::behavior(ctx, behavior)?;
    let spec = builtins::spec(ctx, spec)?;
    spec.validate(loaded.behavior.scenario())
        .with_context(|| format!("specification {} does not fit behavior {behavior}", spec.name))?;
    let report = verify_paradox(&loaded.behavior, &spec, ctx.tol)?;

    let p = match loaded.exact_p_hardy {
        Some(s) if (s.value - report.p_hardy).abs() < 1e-12 => s.to_string(),
        _ => format!("{:.8}", report.p_hardy),
    };
    let mut text = format!(
        "{behavior} against {}: {}\np_hardy = {p}  (tolerance {:e})\n",
        spec.name,
        if report.verified { "verified" } else { "not verified" },
        report.tolerance,
    );
    for r in &report.residuals {
        let _ = writeln!(text, "  {} {:<40} {:.3e}", if r.satisfied { "ok  " } else { "FAIL" }, r.label, r.value);
    }
    let results = json!({
        "behavior": behavior,
        "report": report,
        "exact_p_hardy": loaded.exact_p_hardy,
    });
    ok(results, text)
}

fn config(ctx: &mut Context, file: Option<&Path>) -> anyhow::Result<OptimizerConfig> {
    let mut c = match file {
        Some(path) => {
            let bytes = ctx.read_file(path)?;
            serde_json::from_slice(&bytes).with_context(|| format!("invalid optimizer config {}", path.display()))?
        }
        None => OptimizerConfig::default(),
    };
    if let Some(s) = ctx.seed {
        c.seed = s;
    }
    if let Some(r) = ctx.restarts {
        c.restarts = r;
    }
    c.validate()?;
    Ok(c)
}

fn parse_task(name: &str, constrained: bool, dim: Option<usize>) -> anyhow::Result<Task> {
    let task = match (name, dim) {
        ("hardy-local", None) => Task::HardyLocal,
        ("chsh-paradox-local", None) => Task::ChshParadoxLocal,
        ("chsh-paradox-local-relaxed", None) => Task::ChshParadoxLocalRelaxed,
        ("kcbs-qutrit", None) => return Ok(Task::Kcbs { dim: 3, constrained }),
        ("kcbs", Some(dim)) => return Ok(Task::Kcbs { dim, constrained }),
        ("kcbs", None) => bail!("kcbs needs --dim"),
        (_, Some(_)) => bail!("--dim only applies to kcbs"),
        _ => bail!(
            "unknown task {name:?}: not hardy-local, chsh-paradox-local, chsh-paradox-local-relaxed, kcbs-qutrit or kcbs"
        ),
    };
    if constrained {
        bail!("--constrained only applies to the kcbs tasks");
    }
    Ok(task)
}

fn run(task: Task, config: &OptimizerConfig) -> anyhow::Result<OptimizationResult> {
    info!("{task:?}: {} restarts, seed {}", config.restarts, config.seed);
    let r = maximize(task, config)?;
    info!("{task:?}: {} of {} restarts feasible, best {:?}", r.feasible_restarts, r.restarts_completed, r.best_value);
    Ok(r)
}

pub fn optimize(
    ctx: &mut Context,
    name: &str,
    file: Option<&Path>,
    constrained: bool,
    dim: Option<usize>,
) -> anyhow::Result<Outcome> {
    let task = parse_task(name, constrained, dim)?;
    let config = config(ctx, file)?;
    let r = run(task, &config)?;

    let mut text = format!(
        "{name}: {} of {} restarts feasible (seed {})\n",
        r.feasible_restarts, r.restarts_completed, config.seed
    );
    match r.best_value {
        Some(v) => {
            let _ = writeln!(text, "best feasible value = {v:.10}");
        }
        None => {
            let _ = writeln!(text, "no feasible restart");
        }
    }
    for c in &r.residuals {
        let _ = writeln!(text, "  {:<12} {:.3e}", c.label, c.value);
    }
    if !r.classification_counts.is_empty() {
        let counts: Vec<String> = r.classification_counts.iter().map(|(k, n)| format!("{k:?}: {n}")).collect();
        let _ = writeln!(text, "optima by structure: {}", counts.join(", "));
    }
    let _ = writeln!(text, "parameters: {:?}", r.best_parameters);
    let converged = r.converged();
    Ok(Outcome { results: serde_json::to_value(&r)?, text, converged })
}

/// Vertex probabilities of the exact construction when `spec` lives on its graph.
fn construction_probabilities(spec: &InequalitySpec) -> Option<BTreeMap<usize, Scalar>> {
    let model = chsh_construction();
    (model.graph() == &spec.graph).then(|| model_vertex_probabilities(&model))
}

pub fn inequality(
    ctx: &mut Context,
    name: &str,
    behavior: Option<&str>,
    probabilities: Option<&[f64]>,
) -> anyhow::Result<Outcome> {
    let spec = builtins::inequality(ctx, name)?;
    let mut exact: Option<String> = None;
    let (source, report) = match (behavior, probabilities) {
        (_, Some(ps)) => {
            if ps.len() != spec.graph.order() {
                bail!("{} probabilities given, the graph has {} vertices", ps.len(), spec.graph.order());
            }
            let probs = spec.graph.vertex_ids().zip(ps.iter().copied()).collect();
            ("probabilities".to_string(), spec.evaluate_vertex_probabilities(&probs)?)
        }
        (Some(b), None) if b != "construction" => {
            let loaded = builtins::behavior(ctx, b)?;
            (b.to_string(), spec.evaluate_behavior(&loaded.behavior)?)
        }
        _ => {
            let probs = construction_probabilities(&spec)
                .ok_or_else(|| anyhow!("the construction does not live on the graph of {}", spec.name))?;
            exact = match spec.kind {
                InequalityKind::EventSum => {
                    let weighted = spec.graph.vertices().iter().all(|v| v.weight == 1.0);
                    weighted.then(|| probs.values().copied().sum::<Scalar>().to_string())
                }
                InequalityKind::EdgeCorrelator => {
                    let rational: Option<BTreeMap<_, _>> =
                        probs.iter().map(|(v, s)| s.exact.map(|r| (*v, r))).collect();
                    match rational {
                        Some(r) => Some(Scalar::from(correlator_sum_exact(&r, &spec.graph)?.0).to_string()),
                        None => None,
                    }
                }
            };
            let floats = probs.iter().map(|(v, s)| (*v, s.value)).collect();
            ("construction".to_string(), spec.evaluate_vertex_probabilities(&floats)?)
        }
    };

    let value = exact.clone().unwrap_or_else(|| format!("{:.10}", report.value));
    let relation = match report.direction {
        exclusivity::inequalities::Direction::AtMost => "≤",
        exclusivity::inequalities::Direction::AtLeast => "≥",
    };
    let mut text = format!(
        "{} on {source}: {value}  (classical bound {relation} {}){}\n",
        spec.name,
        report.bound,
        if report.violated { "  VIOLATED" } else { "" },
    );
    for t in &report.breakdown {
        let _ = writeln!(text, "  {:<16} {:.6}", t.label, t.value);
    }
    let results = json!({ "source": source, "report": report, "exact_value": exact });
    ok(results, text)
}

struct Row {
    name: &'static str,
    p_hardy: String,
    value: f64,
    dimension: usize,
    measurements: usize,
}

pub fn tables(ctx: &mut Context) -> anyhow::Result<Outcome> {
    let config = config(ctx, None)?;
    let bell = Scenario::bell_222();

    // the CHSH paradox across the hierarchy
    let (classical_bell, _) = classical_paradox_max(&chsh_paradox_spec(), &bell)?;
    let (classical_ctx, _) = classical_paradox_max(&contextual_chsh_paradox_spec(), &contextual_chsh_scenario())?;
    let classical = classical_bell.max(classical_ctx);
    let local = run(Task::ChshParadoxLocal, &config)?;
    let local_best =
        local.best_value.ok_or_else(|| NonConvergence("chsh-paradox-local found no feasible point".into()))?;
    let model = chsh_construction();
    let p = model_vertex_probabilities(&model);
    let contextual: Scalar = [1, 8].iter().map(|&k| p[&model.vertex_with_label(k).expect("labels 1..8")]).sum();

    // the three paradoxes side by side
    let kcbs = run(Task::Kcbs { dim: 3, constrained: true }, &config)?;
    let kcbs_value = kcbs.best_value.ok_or_else(|| NonConvergence("kcbs-qutrit found no feasible point".into()))?;
    let hardy = run(Task::HardyLocal, &config)?;
    let hardy_value = hardy.best_value.ok_or_else(|| NonConvergence("hardy-local found no feasible point".into()))?;
    let hardy_dim = hardy.bell_model.as_ref().map_or(0, |m| m.state().len());
    let pentagon = ExclusivityGraph::cycle(5);
    let rows = [
        Row {
            name: "CHSH contextual",
            p_hardy: contextual.to_string(),
            value: contextual.value,
            dimension: model.dimension(),
            measurements: model.graph().order(),
        },
        // the saturations pin four of the five vertices to a total of 2
        Row {
            name: "KCBS",
            p_hardy: format!("{:.6}", kcbs_value - 2.0),
            value: kcbs_value - 2.0,
            dimension: 3,
            measurements: pentagon.order(),
        },
        Row {
            name: "Hardy",
            p_hardy: format!("{hardy_value:.6}"),
            value: hardy_value,
            dimension: hardy_dim,
            measurements: bell.measurements.len(),
        },
    ];

    let mut text = String::from("Hierarchy: p_Hardy of the CHSH paradox\n");
    let _ = writeln!(text, "  {:<22} {:<22} contextual quantum", "classical", "two-qubit local");
    let _ = writeln!(
        text,
        "  {:<22} {:<22} {}",
        classical.to_string(),
        format!("{local_best:.1e} ({} restarts)", local.restarts_completed),
        contextual,
    );
    let _ = writeln!(text, "\nParadox comparison");
    let _ = writeln!(text, "  {:<18} {:<20} {:>4} {:>4}", "paradox", "p_Hardy", "dim", "#M");
    for r in &rows {
        let _ = writeln!(text, "  {:<18} {:<20} {:>4} {:>4}", r.name, r.p_hardy, r.dimension, r.measurements);
    }

    let results = json!({
        "hierarchy": {
            "classical": classical,
            "classical_bell": classical_bell,
            "classical_contextual": classical_ctx,
            "two_qubit_local": local_best,
            "two_qubit_local_restarts": local.restarts_completed,
            "two_qubit_local_structure": local.classification_counts,
            "contextual_quantum": contextual,
        },
        "comparison": rows.iter().map(|r| json!({
            "paradox": r.name,
            "p_hardy": r.value,
            "p_hardy_text": r.p_hardy,
            "dimension": r.dimension,
            "measurements": r.measurements,
        })).collect::<Vec<_>>(),
        "config": config,
    });
    ok(results, text)
}
