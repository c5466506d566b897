//! Benchmark matrix runner: cross product of models, algorithms, worker
//! counts and seeds, one CSV row per cell. Distributed cells run under the
//! sim transport; failures are recorded in the status column and the run
//! continues.
//!
//! When the matrix contains a single-node DFS baseline, an `efficiency`
//! column is appended: wall(dfs, 1) / (N * wall(alg, N)), the per-model
//! baseline being the mean over that model's dfs rows.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use mapcheck_core::baselines;
use mapcheck_dist::{run_sim, Mode, SimOptions};

use crate::model_spec::load_model;
use crate::{Algorithm, CliError};

#[derive(Args)]
pub(crate) struct BenchArgs {
    /// Model spec; repeat for several models.
    #[arg(long = "model", required = true)]
    models: Vec<String>,

    /// Algorithm; repeat for several algorithms.
    #[arg(long = "alg", required = true, value_enum)]
    algs: Vec<Algorithm>,

    /// Comma-separated worker counts for distributed algorithms.
    #[arg(long, default_value = "1,2,4")]
    workers: String,

    /// Comma-separated sim seeds.
    #[arg(long, default_value = "1")]
    seeds: String,

    #[arg(long, default_value_t = 64)]
    batch_size: usize,

    #[arg(long, default_value_t = 10_000_000)]
    state_cap: u64,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

struct Row {
    model: String,
    algorithm: &'static str,
    workers: usize,
    seed: u64,
    status: String,
    states: Option<u64>,
    transitions: Option<u64>,
    iterations: Option<u32>,
    messages: Option<u64>,
    wall_ms: f64,
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("bad {what} entry `{s}`")))
        })
        .collect()
}

pub(crate) fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    let worker_counts: Vec<usize> = parse_list(&args.workers, "--workers")?;
    let seeds: Vec<u64> = parse_list(&args.seeds, "--seeds")?;
    if worker_counts.iter().any(|&w| w == 0) {
        return Err(CliError::Config("worker counts must be at least 1".into()));
    }

    let mut rows = Vec::new();
    for model_spec in &args.models {
        let loaded = load_model(model_spec)?;
        for &alg in &args.algs {
            let counts: &[usize] = if alg.is_distributed() {
                &worker_counts
            } else {
                &[1]
            };
            for &workers in counts {
                for &seed in &seeds {
                    rows.push(run_cell(args, model_spec, &loaded, alg, workers, seed));
                }
            }
        }
    }

    // Per-model single-node DFS baseline for the efficiency column.
    let mut baseline: HashMap<&str, (f64, u32)> = HashMap::new();
    for row in &rows {
        if row.algorithm == "dfs" && row.workers == 1 && row.status == "ok" {
            let slot = baseline.entry(row.model.as_str()).or_insert((0.0, 0));
            slot.0 += row.wall_ms;
            slot.1 += 1;
        }
    }
    let with_efficiency = !baseline.is_empty();

    let mut csv = String::new();
    csv.push_str("model,algorithm,workers,seed,status,states,transitions,iterations,messages,wallTimeMs");
    if with_efficiency {
        csv.push_str(",efficiency");
    }
    csv.push('\n');
    for row in &rows {
        let opt = |v: Option<String>| v.unwrap_or_default();
        let fields = [
            row.model.clone(),
            row.algorithm.to_string(),
            row.workers.to_string(),
            row.seed.to_string(),
            row.status.clone(),
            opt(row.states.map(|v| v.to_string())),
            opt(row.transitions.map(|v| v.to_string())),
            opt(row.iterations.map(|v| v.to_string())),
            opt(row.messages.map(|v| v.to_string())),
            format!("{:.3}", row.wall_ms),
        ];
        let mut line: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
        if with_efficiency {
            let eff = baseline
                .get(row.model.as_str())
                .filter(|_| row.status == "ok")
                .map(|(total, n)| {
                    let t_dfs = total / *n as f64;
                    format!("{:.4}", t_dfs / (row.workers as f64 * row.wall_ms))
                })
                .unwrap_or_default();
            line.push(eff);
        }
        csv.push_str(&line.join(","));
        csv.push('\n');
    }
    std::fs::write(&args.out, csv)
        .map_err(|e| CliError::Fault(format!("writing {}: {e}", args.out.display())))?;
    println!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn run_cell(
    args: &BenchArgs,
    model_spec: &str,
    loaded: &crate::model_spec::LoadedModel,
    alg: Algorithm,
    workers: usize,
    seed: u64,
) -> Row {
    let model = loaded.system.as_ref();
    let start = Instant::now();
    let outcome: Result<(u64, u64, u32, u64), String> = match alg {
        Algorithm::Bfs => baselines::bfs_reach(model, args.state_cap)
            .map(|s| (s.states, s.transitions, 1, 0))
            .map_err(|e| e.to_string()),
        Algorithm::Dfs => baselines::dfs_reach(model, args.state_cap)
            .map(|s| (s.states, s.transitions, 1, 0))
            .map_err(|e| e.to_string()),
        Algorithm::Ndfs => baselines::ndfs_cycle(model, args.state_cap)
            .map(|v| (v.states, v.transitions, v.iterations, 0))
            .map_err(|e| e.to_string()),
        Algorithm::MapSeq => baselines::map_sequential(model, args.state_cap)
            .map(|v| (v.states, v.transitions, v.iterations, 0))
            .map_err(|e| e.to_string()),
        Algorithm::MapDist | Algorithm::ReachDist => {
            let opts = SimOptions {
                mode: if alg == Algorithm::ReachDist {
                    Mode::ReachOnly
                } else {
                    Mode::Map
                },
                batch_size: args.batch_size,
                state_cap: args.state_cap,
                ..SimOptions::default()
            };
            run_sim(model, workers, seed, &opts)
                .map(|o| {
                    (
                        o.verdict.states,
                        o.verdict.transitions,
                        o.verdict.iterations,
                        o.verdict.messages,
                    )
                })
                .map_err(|e| e.to_string())
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match outcome {
        Ok((states, transitions, iterations, messages)) => Row {
            model: model_spec.to_string(),
            algorithm: alg.name(),
            workers,
            seed,
            status: "ok".into(),
            states: Some(states),
            transitions: Some(transitions),
            iterations: Some(iterations),
            messages: Some(messages),
            wall_ms,
        },
        Err(msg) => Row {
            model: model_spec.to_string(),
            algorithm: alg.name(),
            workers,
            seed,
            status: format!("error: {msg}"),
            states: None,
            transitions: None,
            iterations: None,
            messages: None,
            wall_ms,
        },
    }
}

/// RFC 4180 field escaping; model specs may contain commas.
fn csv_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
