//! Verdict reporting: a human-readable block plus one machine-readable
//! RESULT line (grammar-stable, covered by golden tests).

use std::time::Duration;

use mapcheck_core::baselines::{CycleVerdict, ReachStats};
use mapcheck_core::model::EncodedState;
use mapcheck_core::TransitionSystem;
use mapcheck_dist::{RunResult, Verdict};

use crate::model_spec::LoadedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum ExitStatus {
    CycleFound,
    Clean,
}

pub(crate) struct Report {
    pub status: ExitStatus,
    pub result_line: String,
    pub headline: String,
    pub details: Vec<String>,
}

fn witness_note(model: &dyn TransitionSystem, witness: &EncodedState) -> String {
    match model.describe(witness) {
        Ok(text) => format!("witness: {text} ({})", witness.to_hex()),
        Err(_) => format!("witness: {}", witness.to_hex()),
    }
}

impl Report {
    pub fn from_reach(stats: ReachStats) -> Report {
        Report {
            status: ExitStatus::Clean,
            result_line: format!(
                "RESULT=REACH STATES={} ITER=1 TRANSITIONS={}",
                stats.states, stats.transitions
            ),
            headline: "reachability complete".into(),
            details: vec![format!(
                "states: {}, transitions: {}, peak frontier: {}",
                stats.states, stats.transitions, stats.peak_frontier
            )],
        }
    }

    pub fn from_cycle(verdict: CycleVerdict, model: &dyn TransitionSystem) -> Report {
        let mut details = vec![format!(
            "states: {}, transitions: {}, iterations: {}, excluded: {}",
            verdict.states,
            verdict.transitions,
            verdict.iterations,
            verdict.excluded.len()
        )];
        if verdict.found {
            let witness = verdict.witness.as_ref().expect("found verdicts carry a witness");
            details.insert(0, witness_note(model, witness));
            Report {
                status: ExitStatus::CycleFound,
                result_line: format!(
                    "RESULT=CYCLE STATES={} ITER={} WITNESS={}",
                    verdict.states,
                    verdict.iterations,
                    witness.to_hex()
                ),
                headline: "accepting cycle found".into(),
                details,
            }
        } else {
            Report {
                status: ExitStatus::Clean,
                result_line: format!(
                    "RESULT=NO_CYCLE STATES={} ITER={}",
                    verdict.states, verdict.iterations
                ),
                headline: "no accepting cycle".into(),
                details,
            }
        }
    }

    pub fn from_verdict(verdict: Verdict, model: &dyn TransitionSystem, workers: usize) -> Report {
        let mut details = vec![format!(
            "states: {}, transitions: {}, iterations: {}, state messages: {}, excluded: {}",
            verdict.states,
            verdict.transitions,
            verdict.iterations,
            verdict.messages,
            verdict.excluded_total
        )];
        for s in &verdict.per_worker {
            details.push(format!(
                "worker {}: owned {}, sent {}, received {}, excluded {}",
                s.worker, s.owned_states, s.sent_states, s.received_states, s.excluded
            ));
        }
        let _ = workers;
        match &verdict.result {
            RunResult::Cycle { witness } => {
                details.insert(0, witness_note(model, witness));
                Report {
                    status: ExitStatus::CycleFound,
                    result_line: format!(
                        "RESULT=CYCLE STATES={} ITER={} WITNESS={}",
                        verdict.states,
                        verdict.iterations,
                        witness.to_hex()
                    ),
                    headline: "accepting cycle found".into(),
                    details,
                }
            }
            RunResult::NoCycle => Report {
                status: ExitStatus::Clean,
                result_line: format!(
                    "RESULT=NO_CYCLE STATES={} ITER={}",
                    verdict.states, verdict.iterations
                ),
                headline: "no accepting cycle".into(),
                details,
            },
            RunResult::Reach => Report {
                status: ExitStatus::Clean,
                result_line: format!(
                    "RESULT=REACH STATES={} ITER={} TRANSITIONS={}",
                    verdict.states, verdict.iterations, verdict.transitions
                ),
                headline: "distributed reachability complete".into(),
                details,
            },
        }
    }
}

pub(crate) fn print_search_report(
    loaded: &LoadedModel,
    algorithm: &str,
    report: &Report,
    wall: Duration,
) {
    println!("model: {} ({})", loaded.descriptor, loaded.kind);
    println!("algorithm: {algorithm}");
    println!("verdict: {}", report.headline);
    for line in &report.details {
        println!("  {line}");
    }
    println!("  wall time: {:.3} ms", wall.as_secs_f64() * 1e3);
    println!("{}", report.result_line);
}
