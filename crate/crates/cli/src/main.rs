mod builtins;
mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use report::{Context, NonConvergence};

/// Exclusivity graphs, paradox verification and the local/contextual bounds.
#[derive(Debug, Parser, Serialize)]
#[command(name = "exclusivity", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Serialize)]
struct Global {
    /// Tolerance for zero and saturation conditions.
    #[arg(long, global = true, default_value_t = exclusivity::paradox::DEFAULT_TOL)]
    tol: f64,
    /// Optimizer seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Optimizer restarts (overrides the config file).
    #[arg(long, global = true)]
    restarts: Option<usize>,
    /// Print the JSON run report instead of text.
    #[arg(long, global = true)]
    #[serde(skip)]
    json: bool,
    /// Also write the JSON run report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Exclusivity graph of a builtin (2-2-2, chsh, pentagon, chsh-contextual)
    /// or of a graph/scenario JSON file, with α, ϑ and odd holes.
    Graph { input: String },
    /// Checks a behavior against a paradox specification.
    ///
    /// Behaviors: construction, uniform, tsirelson, deterministic:a0a1b0b1 or
    /// a JSON file. Specifications: hardy, chsh, chsh-contextual or a JSON file.
    Verify { behavior: String, spec: String },
    /// Runs a multistart optimization: hardy-local, chsh-paradox-local,
    /// chsh-paradox-local-relaxed, kcbs-qutrit, or kcbs with --dim.
    Optimize {
        task: String,
        /// Optimizer configuration JSON.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Impose the KCBS paradox saturations.
        #[arg(long)]
        constrained: bool,
        /// Real dimension of the KCBS vectors.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Evaluates chsh, kcbs, chsh-correlator or an inequality JSON file.
    Inequality {
        name: String,
        /// Behavior to evaluate (same names as `verify`).
        #[arg(long, conflicts_with = "probabilities")]
        behavior: Option<String>,
        /// Per-vertex probabilities in graph vertex order, comma separated.
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        probabilities: Option<Vec<f64>>,
    },
    /// Recomputes the hierarchy and comparison tables.
    Tables,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut ctx = Context::new(cli.global.tol, cli.global.seed, cli.global.restarts);
    let outcome = match &cli.command {
        Command::Graph { input } => commands::graph(&mut ctx, input),
        Command::Verify { behavior, spec } => commands::verify(&mut ctx, behavior, spec),
        Command::Optimize { task, config, constrained, dim } => {
            commands::optimize(&mut ctx, task, config.as_deref(), *constrained, *dim)
        }
        Command::Inequality { name, behavior, probabilities } => {
            commands::inequality(&mut ctx, name, behavior.as_deref(), probabilities.as_deref())
        }
        Command::Tables => commands::tables(&mut ctx),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(if e.is::<NonConvergence>() { 1 } else { 2 });
        }
    };
    let name = serde_json::to_value(&cli.command).ok().and_then(|v| match v {
        serde_json::Value::String(s) => Some(s),
        serde_json::Value::Object(m) => m.keys().next().cloned(),
        _ => None,
    });
    let report = ctx.finish(name.unwrap_or_default(), &cli, outcome.results);
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(path) = &cli.global.out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if cli.global.json {
        println!("{json}");
    } else {
        print!("{}", outcome.text);
    }
    if outcome.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
