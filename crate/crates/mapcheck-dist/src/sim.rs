//! Deterministic in-process transport: a seeded cooperative scheduler
//! drives all workers in one thread, picking at every step between
//! delivering the head of one pending edge queue and advancing one
//! runnable worker. Identical seeds replay identical schedules, so any
//! failure reproduces exactly.
//!
//! The simulator is also the test oracle for the protocol itself. At every
//! step it checks conservation (the workers' send/receive counters must
//! equal records in flight plus records still buffered), and whenever the
//! coordinator declares quiescence it verifies against its omniscient view
//! that no state record is in flight and every work stack is empty. It
//! also tracks true quiescence onsets and fails if the token needs more
//! than the in-progress circuit plus two clean circuits to detect.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mapcheck_core::model::TransitionSystem;

use crate::wire::Frame;
use crate::worker::{FrameSink, Mode, Verdict, Worker, WorkerConfig, WorkerStats};
use crate::DistError;

/// Delivery scheduling policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimPolicy {
    /// Uniformly random over all enabled events.
    Random,
    /// Adversarial: when any queue head is a TOKEN, deliveries are chosen
    /// among those queues only, so tokens systematically overtake states.
    TokenFirst,
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub mode: Mode,
    pub batch_size: usize,
    pub state_cap: u64,
    pub policy: SimPolicy,
    pub collect_log: bool,
    /// Also return every worker's visited-state set (for partition tests).
    pub collect_states: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            mode: Mode::Map,
            batch_size: 64,
            state_cap: u64::MAX,
            policy: SimPolicy::Random,
            collect_log: false,
            collect_states: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub verdict: Verdict,
    /// Scheduler event log (one line per step) when requested.
    pub log: Vec<String>,
    pub steps: u64,
    /// Per-worker visited states when requested, in worker order.
    pub per_worker_states: Vec<Vec<mapcheck_core::model::EncodedState>>,
}

struct SimNet {
    workers: usize,
    /// Edge queues, indexed src * workers + dst.
    queues: Vec<VecDeque<Frame>>,
    /// State records sitting in edge queues.
    in_flight_states: u64,
}

impl SimNet {
    fn new(workers: usize) -> Self {
        SimNet {
            workers,
            queues: vec![VecDeque::new(); workers * workers],
            in_flight_states: 0,
        }
    }

    fn push(&mut self, src: usize, dst: usize, frame: Frame) {
        self.in_flight_states += frame.state_count();
        self.queues[src * self.workers + dst].push_back(frame);
    }

    fn pop(&mut self, src: usize, dst: usize) -> Frame {
        let frame = self.queues[src * self.workers + dst]
            .pop_front()
            .expect("scheduled delivery from a non-empty queue");
        self.in_flight_states -= frame.state_count();
        frame
    }

    fn head_is_token(&self, src: usize, dst: usize) -> bool {
        matches!(
            self.queues[src * self.workers + dst].front(),
            Some(Frame::Token(_))
        )
    }
}

struct SimSink<'a> {
    net: &'a mut SimNet,
    src: usize,
}

impl FrameSink for SimSink<'_> {
    fn send(&mut self, dst: usize, frame: Frame) -> Result<(), DistError> {
        self.net.push(self.src, dst, frame);
        Ok(())
    }
}

/// Run the distributed search under the simulator.
pub fn run_sim(
    model: &dyn TransitionSystem,
    workers: usize,
    seed: u64,
    opts: &SimOptions,
) -> Result<SimOutput, DistError> {
    if workers == 0 {
        return Err(DistError::Config("worker count must be at least 1".into()));
    }
    let mut net = SimNet::new(workers);
    let mut ws: Vec<Worker> = (0..workers)
        .map(|id| {
            Worker::new(
                &WorkerConfig {
                    id,
                    workers,
                    mode: opts.mode,
                    batch_size: opts.batch_size,
                    state_cap: opts.state_cap,
                },
                model,
            )
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut log = Vec::new();
    let mut steps = 0u64;
    // Liveness accounting: token returns to the initiator since true
    // quiescence began. The circuit in progress at onset may return once
    // and each clean circuit once more; a fourth return means detection
    // was missed.
    let mut quiescent = false;
    let mut returns_since_quiescence = 0u32;

    enum Event {
        Deliver(usize, usize),
        Advance(usize),
    }

    while !ws.iter().all(|w| w.is_done()) {
        // Enumerate enabled events in a fixed order.
        let mut deliveries: Vec<(usize, usize)> = Vec::new();
        for src in 0..workers {
            for dst in 0..workers {
                if !net.queues[src * workers + dst].is_empty() {
                    deliveries.push((src, dst));
                }
            }
        }
        if opts.policy == SimPolicy::TokenFirst {
            let token_edges: Vec<(usize, usize)> = deliveries
                .iter()
                .copied()
                .filter(|&(s, d)| net.head_is_token(s, d))
                .collect();
            if !token_edges.is_empty() {
                deliveries = token_edges;
            }
        }
        let advances: Vec<usize> = (0..workers).filter(|&i| ws[i].is_runnable()).collect();
        let total = deliveries.len() + advances.len();
        if total == 0 {
            return Err(DistError::Stall(
                "global deadlock: every worker is blocked and no message is in flight".into(),
            ));
        }
        let pick = rng.gen_range(0..total);
        let event = if pick < deliveries.len() {
            let (src, dst) = deliveries[pick];
            Event::Deliver(src, dst)
        } else {
            Event::Advance(advances[pick - deliveries.len()])
        };

        match event {
            Event::Deliver(src, dst) => {
                let frame = net.pop(src, dst);
                if opts.collect_log {
                    log.push(format!("deliver {src}->{dst} {}", frame.label()));
                }
                if quiescent && dst == 0 && matches!(frame, Frame::Token(_)) {
                    returns_since_quiescence += 1;
                    if returns_since_quiescence > 3 {
                        return Err(DistError::Stall(
                            "termination detection missed its circuit bound after quiescence"
                                .into(),
                        ));
                    }
                }
                ws[dst].on_frame(frame)?;
            }
            Event::Advance(idx) => {
                let report = {
                    let mut sink = SimSink {
                        net: &mut net,
                        src: idx,
                    };
                    ws[idx].step(&mut sink)?
                };
                if opts.collect_log {
                    log.push(format!("advance {idx} {}", report.action.label()));
                }
                if report.detected_quiescence {
                    // Soundness: the coordinator may declare quiescence
                    // only when the omniscient counters agree.
                    if net.in_flight_states != 0 {
                        return Err(DistError::Corruption(format!(
                            "quiescence declared with {} state records in flight",
                            net.in_flight_states
                        )));
                    }
                    if let Some(busy) = ws.iter().position(|w| !w.work_is_empty()) {
                        return Err(DistError::Corruption(format!(
                            "quiescence declared while worker {busy} still has work"
                        )));
                    }
                    if let Some(buffered) = ws.iter().position(|w| w.buffered_states() > 0) {
                        return Err(DistError::Corruption(format!(
                            "quiescence declared while worker {buffered} holds unsent states"
                        )));
                    }
                }
            }
        }
        steps += 1;

        // Conservation: counters balance against in-flight plus buffered.
        let count_sum: i64 = ws.iter().map(|w| w.safra_count()).sum();
        let buffered: u64 = ws.iter().map(|w| w.buffered_states()).sum();
        if count_sum != (net.in_flight_states + buffered) as i64 {
            return Err(DistError::Corruption(format!(
                "message counters {count_sum} diverge from {} in flight + {buffered} buffered",
                net.in_flight_states
            )));
        }

        let quiet_now = net.in_flight_states == 0
            && buffered == 0
            && ws.iter().all(|w| w.work_is_empty());
        if quiet_now && !quiescent {
            returns_since_quiescence = 0;
        }
        quiescent = quiet_now;
    }

    // Exactly-once: nothing may remain undelivered after termination.
    for src in 0..workers {
        for dst in 0..workers {
            if let Some(frame) = net.queues[src * workers + dst].front() {
                return Err(DistError::Corruption(format!(
                    "undelivered {} from {src} to {dst} after termination",
                    frame.label()
                )));
            }
        }
    }

    let per_worker_states = if opts.collect_states {
        ws.iter().map(|w| w.visited_states()).collect()
    } else {
        Vec::new()
    };
    Ok(SimOutput {
        verdict: aggregate(&ws)?,
        log,
        steps,
        per_worker_states,
    })
}

fn aggregate(ws: &[Worker]) -> Result<Verdict, DistError> {
    let (result, iterations) = ws[0]
        .outcome()
        .expect("aggregation runs after all workers finished");
    for w in ws.iter().skip(1) {
        let (r, i) = w.outcome().expect("all workers finished");
        if r != result || i != iterations {
            return Err(DistError::Corruption(format!(
                "worker {} finished with a different outcome",
                w.id()
            )));
        }
    }
    let per_worker: Vec<WorkerStats> = ws.iter().map(|w| w.stats()).collect();
    let mut excluded_states = Vec::new();
    for w in ws {
        excluded_states.extend(w.excluded_states());
    }
    excluded_states.sort_unstable();
    Ok(Verdict {
        result,
        iterations,
        states: per_worker.iter().map(|s| s.owned_states).sum(),
        transitions: per_worker.iter().map(|s| s.transitions).sum(),
        messages: per_worker.iter().map(|s| s.sent_states).sum(),
        excluded_total: excluded_states.len() as u64,
        excluded_states,
        per_worker,
    })
}
