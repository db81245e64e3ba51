use std::path::Path;

use anyhow::{anyhow, bail, Context as _};
use exclusivity::classical::{behavior_from_strategy, DeterministicStrategy};
use exclusivity::inequalities::{tsirelson_counterexample, InequalitySpec};
use exclusivity::paradox::{chsh_paradox_spec, contextual_chsh_paradox_spec, hardy_spec};
use exclusivity::quantum::{chsh_construction, model_vertex_probabilities};
use exclusivity::scenario::{build_exclusivity_graph, chsh_event_graph};
use exclusivity::vector::Scalar;
use exclusivity::{Behavior, ExclusivityGraph, ParadoxSpec, Scenario};
use serde::de::DeserializeOwned;

use crate::report::Context;

pub const GRAPHS: [&str; 4] = ["2-2-2", "chsh", "pentagon", "chsh-contextual"];

fn parse_file<T: DeserializeOwned>(ctx: &mut Context, name: &str) -> anyhow::Result<T> {
    let bytes = ctx.read_file(Path::new(name))?;
    serde_json::from_slice(&bytes).with_context(|| format!("invalid JSON in {name}"))
}

fn is_file(name: &str) -> bool {
    Path::new(name).is_file()
}

pub fn graph(ctx: &mut Context, name: &str) -> anyhow::Result<ExclusivityGraph> {
    Ok(match name {
        "2-2-2" => build_exclusivity_graph(&Scenario::bell_222()),
        "chsh" => chsh_event_graph(),
        "pentagon" => ExclusivityGraph::cycle(5),
        "chsh-contextual" => chsh_construction().labelled_graph(),
        _ if is_file(name) => {
            let value: serde_json::Value = parse_file(ctx, name)?;
            // a graph file has `vertices`; anything else is read as a scenario
            if value.get("vertices").is_some() {
                serde_json::from_value(value).with_context(|| format!("invalid graph in {name}"))?
            } else {
                let s: Scenario =
                    serde_json::from_value(value).with_context(|| format!("invalid scenario in {name}"))?;
                build_exclusivity_graph(&s)
            }
        }
        _ => bail!("unknown graph {name:?}: not a builtin ({}) or a file", GRAPHS.join(", ")),
    })
}

/// A behavior, plus the exact positive-event sum when the builtin knows it.
pub struct LoadedBehavior {
    pub behavior: Behavior,
    pub exact_p_hardy: Option<Scalar>,
}

/// `deterministic:a0a1b0b1` with four binary digits.
fn deterministic(bits: &str) -> anyhow::Result<Behavior> {
    let digits: Vec<u8> = bits
        .chars()
        .map(|c| c.to_digit(2).map(|d| d as u8))
        .collect::<Option<_>>()
        .filter(|d: &Vec<u8>| d.len() == 4)
        .ok_or_else(|| anyhow!("deterministic behavior needs four binary digits a0a1b0b1, got {bits:?}"))?;
    let outcomes = ["A0", "A1", "B0", "B1"].iter().zip(digits).map(|(m, o)| (m.to_string(), o)).collect();
    Ok(behavior_from_strategy(&DeterministicStrategy { outcomes }, &Scenario::bell_222()))
}

pub fn behavior(ctx: &mut Context, name: &str) -> anyhow::Result<LoadedBehavior> {
    let plain = |behavior| LoadedBehavior { behavior, exact_p_hardy: None };
    Ok(match name {
        "construction" => {
            let model = chsh_construction();
            let p = model_vertex_probabilities(&model);
            let exact = [1, 8].iter().map(|&k| p[&model.vertex_with_label(k).expect("labels 1..8")]).sum();
            LoadedBehavior { behavior: model.contextual_behavior(), exact_p_hardy: Some(exact) }
        }
        "uniform" => plain(Behavior::uniform(Scenario::bell_222())),
        "tsirelson" => plain(tsirelson_counterexample()),
        _ if name.starts_with("deterministic:") => plain(deterministic(&name["deterministic:".len()..])?),
        _ if is_file(name) => plain(parse_file(ctx, name)?),
        _ => bail!("unknown behavior {name:?}: not construction, uniform, tsirelson, deterministic:a0a1b0b1 or a file"),
    })
}

pub fn spec(ctx: &mut Context, name: &str) -> anyhow::Result<ParadoxSpec> {
    Ok(match name {
        "hardy" => hardy_spec(),
        "chsh" => chsh_paradox_spec(),
        "chsh-contextual" => contextual_chsh_paradox_spec(),
        _ if is_file(name) => parse_file(ctx, name)?,
        _ => bail!("unknown paradox specification {name:?}: not hardy, chsh, chsh-contextual or a file"),
    })
}

pub fn inequality(ctx: &mut Context, name: &str) -> anyhow::Result<InequalitySpec> {
    Ok(match name {
        "chsh" => InequalitySpec::chsh(),
        "kcbs" => InequalitySpec::kcbs(),
        "chsh-correlator" => InequalitySpec::chsh_correlator(),
        _ if is_file(name) => parse_file(ctx, name)?,
        _ => bail!("unknown inequality {name:?}: not chsh, kcbs, chsh-correlator or a file"),
    })
}
