//! The per-worker event loop of the distributed MAP search.
//!
//! A worker owns the states that hash to its index. It consumes three
//! queues with strict priority: control messages first, then the work
//! stack of (state, map value) units, then termination-detection tokens
//! (only touched when control and work are empty). When everything is
//! empty it flushes its outbound batches and blocks for messages.
//!
//! Processing one work unit `(s, p)`:
//!
//! 1. `p == s` means `s` is its own accepting predecessor: record the
//!    witness and broadcast FLUSH. The check runs at the owner, which is
//!    the one side that knows exclusion state.
//! 2. Otherwise fold `p` into the stored map value. An accepting,
//!    non-excluded state receiving a strictly greater value is dominated
//!    and leaves the shrink set.
//! 3. On growth or first visit this iteration, propagate
//!    `max(new value, s if accepting-and-active)` to every successor's
//!    owner. First visits forward even a BOTTOM value so iteration 1
//!    doubles as distributed reachability.
//!
//! The worker is a poll-driven state machine ([`Worker::step`]) so the
//! deterministic simulator and the TCP driver share one implementation.

use std::collections::VecDeque;

use mapcheck_core::model::{EncodedState, TransitionSystem};
use mapcheck_core::store::{map_order, owner, EntryId, StateTable};

use crate::safra::{self, SafraLocal, Token, TokenOutcome};
use crate::wire::{ControlMsg, Frame, StateMsg, StatsMsg};
use crate::DistError;

/// What the checker is computing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Full MAP accepting-cycle search.
    Map,
    /// Exactly one iteration with acceptance ignored: distributed
    /// reachability, for benchmarking traversal cost in isolation.
    ReachOnly,
}

#[derive(Debug, Clone)]
pub struct WorkerConfig {
    pub id: usize,
    pub workers: usize,
    pub mode: Mode,
    /// State records per outbound frame before an eager flush.
    pub batch_size: usize,
    /// Max states interned by this worker.
    pub state_cap: u64,
}

/// Destination-addressed frame output.
pub trait FrameSink {
    fn send(&mut self, dst: usize, frame: Frame) -> Result<(), DistError>;
}

/// Final verdict of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    Cycle { witness: EncodedState },
    NoCycle,
    Reach,
}

/// Per-worker statistics, aggregated into the [`Verdict`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkerStats {
    pub worker: usize,
    /// States owned and visited by this worker (its table size).
    pub owned_states: u64,
    /// Successor pairs explored on first visits of iteration 1.
    pub transitions: u64,
    pub sent_states: u64,
    pub received_states: u64,
    pub excluded: u64,
}

/// Aggregated outcome of a distributed run. Wall time is reported by the
/// drivers, not here, so verdicts compare exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub result: RunResult,
    pub iterations: u32,
    /// Total distinct states visited (the workers' tables are disjoint).
    pub states: u64,
    pub transitions: u64,
    /// Total STATE records sent.
    pub messages: u64,
    pub excluded_total: u64,
    /// Excluded accepting states, sorted. Complete under the simulator;
    /// under TCP only the local worker's exclusions are listed (counts
    /// are always global).
    pub excluded_states: Vec<EncodedState>,
    pub per_worker: Vec<WorkerStats>,
}

/// ITERATE/TERMINATE decision at global quiescence (worker 0 only).
pub fn coordinator_decide(
    global_dominated_zero: bool,
    cycle_found: bool,
    witness: Option<EncodedState>,
) -> ControlMsg {
    if cycle_found {
        ControlMsg::Terminate { witness }
    } else if global_dominated_zero {
        ControlMsg::Terminate { witness: None }
    } else {
        ControlMsg::Iterate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    /// Did one unit of work; call again.
    Progress,
    /// Nothing to do until a frame arrives.
    Blocked,
    /// TERMINATE processed; the outcome is available.
    Finished,
}

/// What a step did, for event logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAction {
    None,
    Control(&'static str),
    Work,
    TokenForward,
    TokenDetect,
    FlushBuffers,
    InitToken,
}

impl StepAction {
    pub fn label(&self) -> &'static str {
        match self {
            StepAction::None => "idle",
            StepAction::Control(what) => what,
            StepAction::Work => "work",
            StepAction::TokenForward => "token-forward",
            StepAction::TokenDetect => "token-detect",
            StepAction::FlushBuffers => "flush-out",
            StepAction::InitToken => "init-token",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    pub status: StepStatus,
    pub action: StepAction,
    /// Set when this step established global quiescence (worker 0 only).
    pub detected_quiescence: bool,
}

impl StepReport {
    fn progress(action: StepAction) -> Self {
        StepReport {
            status: StepStatus::Progress,
            action,
            detected_quiescence: false,
        }
    }
}

struct Outcome {
    result: RunResult,
    iterations: u32,
}

/// One MAP worker.
pub struct Worker<'m> {
    id: usize,
    workers: usize,
    mode: Mode,
    batch_size: usize,
    model: &'m dyn TransitionSystem,

    table: StateTable,
    work: Vec<StateMsg>,
    control: VecDeque<ControlMsg>,
    tokens: VecDeque<Token>,
    out: Vec<Vec<StateMsg>>,

    safra: SafraLocal,
    shrink: Vec<EntryId>,
    dominated_count: u64,
    flush_mode: bool,
    iteration: u32,
    witness: Option<EncodedState>,
    pending_token_init: bool,
    /// Coordinator decision staged at quiescence; broadcast and applied on
    /// the next step so the detection instant stays observable.
    pending_decision: Option<ControlMsg>,
    outcome: Option<Outcome>,

    sent_states: u64,
    received_states: u64,
    transitions: u64,
    excluded_log: Vec<EncodedState>,
}

impl<'m> Worker<'m> {
    /// Build a worker with its owned initial states already seeded.
    /// Worker 0 will initiate the termination-detection token when idle.
    pub fn new(cfg: &WorkerConfig, model: &'m dyn TransitionSystem) -> Self {
        assert!(cfg.workers >= 1 && cfg.id < cfg.workers);
        assert!(cfg.batch_size >= 1);
        let mut w = Worker {
            id: cfg.id,
            workers: cfg.workers,
            mode: cfg.mode,
            batch_size: cfg.batch_size.min(crate::wire::MAX_BATCH),
            model,
            table: StateTable::with_limit(model.state_width(), cfg.state_cap),
            work: Vec::new(),
            control: VecDeque::new(),
            tokens: VecDeque::new(),
            out: vec![Vec::new(); cfg.workers],
            safra: SafraLocal::new(),
            shrink: Vec::new(),
            dominated_count: 0,
            flush_mode: false,
            iteration: 1,
            witness: None,
            pending_token_init: cfg.id == 0,
            pending_decision: None,
            outcome: None,
            sent_states: 0,
            received_states: 0,
            transitions: 0,
            excluded_log: Vec::new(),
        };
        w.seed();
        w
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_some()
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }

    pub fn work_is_empty(&self) -> bool {
        self.work.is_empty()
    }

    pub fn buffered_states(&self) -> u64 {
        self.out.iter().map(|b| b.len() as u64).sum()
    }

    pub fn safra_count(&self) -> i64 {
        self.safra.message_count
    }

    /// Worker has something to do without new input.
    pub fn is_runnable(&self) -> bool {
        !self.is_done()
            && (self.pending_decision.is_some()
                || !self.control.is_empty()
                || !self.work.is_empty()
                || !self.tokens.is_empty()
                || self.buffered_states() > 0
                || self.pending_token_init)
    }

    pub fn stats(&self) -> WorkerStats {
        WorkerStats {
            worker: self.id,
            owned_states: self.table.len() as u64,
            transitions: self.transitions,
            sent_states: self.sent_states,
            received_states: self.received_states,
            excluded: self.excluded_log.len() as u64,
        }
    }

    pub fn stats_msg(&self) -> StatsMsg {
        StatsMsg {
            worker: self.id as u16,
            owned_states: self.table.len() as u64,
            transitions: self.transitions,
            sent_states: self.sent_states,
            received_states: self.received_states,
            excluded: self.excluded_log.len() as u64,
        }
    }

    /// Excluded states recorded by this worker, sorted.
    pub fn excluded_states(&self) -> Vec<EncodedState> {
        self.excluded_log.clone()
    }

    /// Identity bytes of every state this worker has interned.
    pub fn visited_states(&self) -> Vec<EncodedState> {
        self.table.iter_states().map(EncodedState::new).collect()
    }

    /// Result and iteration count once TERMINATE has been processed.
    pub fn outcome(&self) -> Option<(RunResult, u32)> {
        self.outcome
            .as_ref()
            .map(|o| (o.result.clone(), o.iterations))
    }

    fn seed(&mut self) {
        for s in self.model.initial_states() {
            if owner(s.as_bytes(), self.workers) == self.id {
                self.work.push(StateMsg {
                    target: s,
                    map_value: None,
                });
            }
        }
    }

    /// Route one received frame into the queues. STATE receipts are
    /// counted for termination detection even in flush mode, where the
    /// records themselves are discarded.
    pub fn on_frame(&mut self, frame: Frame) -> Result<(), DistError> {
        match frame {
            Frame::States(batch) => {
                self.safra.on_receive(batch.len() as u64);
                self.received_states += batch.len() as u64;
                for msg in batch {
                    let own = owner(msg.target.as_bytes(), self.workers);
                    if own != self.id {
                        return Err(DistError::Corruption(format!(
                            "state {} delivered to worker {} but owned by {}",
                            msg.target, self.id, own
                        )));
                    }
                    if !self.flush_mode && self.outcome.is_none() {
                        self.work.push(msg);
                    }
                }
            }
            Frame::Control(ctrl) => self.control.push_back(ctrl),
            Frame::Token(token) => self.tokens.push_back(token),
            Frame::Stats(s) => {
                return Err(DistError::Corruption(format!(
                    "unexpected STATS frame from worker {} during the run",
                    s.worker
                )));
            }
        }
        Ok(())
    }

    /// Execute one scheduling unit.
    pub fn step(&mut self, sink: &mut dyn FrameSink) -> Result<StepReport, DistError> {
        if self.is_done() {
            return Ok(StepReport {
                status: StepStatus::Finished,
                action: StepAction::None,
                detected_quiescence: false,
            });
        }
        if let Some(decision) = self.pending_decision.take() {
            self.broadcast(decision.clone(), sink)?;
            return match decision {
                ControlMsg::Terminate { witness } => {
                    self.finish(witness);
                    Ok(StepReport {
                        status: StepStatus::Finished,
                        action: StepAction::Control("decide-terminate"),
                        detected_quiescence: false,
                    })
                }
                ControlMsg::Iterate => {
                    self.apply_iterate();
                    Ok(StepReport::progress(StepAction::Control("decide-iterate")))
                }
                ControlMsg::Flush { .. } => unreachable!("decide never flushes"),
            };
        }
        if let Some(ctrl) = self.control.pop_front() {
            return self.handle_control(ctrl);
        }
        if let Some(unit) = self.work.pop() {
            let delta = self.process_work(unit, sink)?;
            self.dominated_count += delta;
            return Ok(StepReport::progress(StepAction::Work));
        }
        if let Some(token) = self.tokens.pop_front() {
            return self.handle_token(token, sink);
        }
        if self.buffered_states() > 0 {
            self.flush_buffers(sink)?;
            return Ok(StepReport::progress(StepAction::FlushBuffers));
        }
        if self.pending_token_init {
            self.pending_token_init = false;
            let token = safra::fresh_token(
                &mut self.safra,
                self.dominated_count == 0,
                self.witness.as_ref(),
            );
            self.send_token(token, sink)?;
            return Ok(StepReport::progress(StepAction::InitToken));
        }
        Ok(StepReport {
            status: StepStatus::Blocked,
            action: StepAction::None,
            detected_quiescence: false,
        })
    }

    fn handle_control(&mut self, ctrl: ControlMsg) -> Result<StepReport, DistError> {
        match ctrl {
            ControlMsg::Flush { .. } => {
                self.work.clear();
                self.flush_mode = true;
                Ok(StepReport::progress(StepAction::Control("ctrl-flush")))
            }
            ControlMsg::Iterate => {
                self.apply_iterate();
                Ok(StepReport::progress(StepAction::Control("ctrl-iterate")))
            }
            ControlMsg::Terminate { witness } => {
                self.finish(witness);
                Ok(StepReport {
                    status: StepStatus::Finished,
                    action: StepAction::Control("ctrl-terminate"),
                    detected_quiescence: false,
                })
            }
        }
    }

    fn finish(&mut self, witness: Option<EncodedState>) {
        let result = match (self.mode, witness) {
            (Mode::ReachOnly, _) => RunResult::Reach,
            (Mode::Map, Some(w)) => RunResult::Cycle { witness: w },
            (Mode::Map, None) => RunResult::NoCycle,
        };
        self.outcome = Some(Outcome {
            result,
            iterations: self.iteration,
        });
    }

    /// Process one work unit; returns 1 if an owned accepting state became
    /// dominated.
    fn process_work(
        &mut self,
        unit: StateMsg,
        sink: &mut dyn FrameSink,
    ) -> Result<u64, DistError> {
        debug_assert!(!self.flush_mode, "work processed in flush mode");
        let StateMsg { target: s, map_value: p } = unit;
        debug_assert_eq!(owner(s.as_bytes(), self.workers), self.id);

        if p.as_ref() == Some(&s) {
            // s is its own maximal accepting predecessor: accepting cycle.
            if self.witness.is_none() {
                self.witness = Some(s);
            }
            self.work.clear();
            self.flush_mode = true;
            self.broadcast(ControlMsg::Flush {
                witness: self.witness.clone(),
            }, sink)?;
            return Ok(0);
        }

        let accepting = match self.mode {
            Mode::ReachOnly => false,
            Mode::Map => self
                .model
                .is_accepting(&s)
                .map_err(|e| DistError::Corruption(format!("worker {}: {e}", self.id)))?,
        };

        let (entry, _) = self
            .table
            .intern(s.as_bytes())
            .map_err(|e| DistError::from_store(e, self.id))?;

        let mut delta = 0u64;
        let forward: Option<(Option<EncodedState>, bool)>;
        {
            let iteration = self.iteration;
            let meta = self.table.meta_mut(entry);
            let first_visit = meta.iteration_tag != iteration;
            if first_visit {
                meta.iteration_tag = iteration;
                meta.map_value = None;
                meta.dominated = false;
            }
            let active = accepting && !meta.excluded;
            if first_visit && active {
                self.shrink.push(entry);
            }
            let new_val = match map_order(meta.map_value.as_ref(), p.as_ref()) {
                std::cmp::Ordering::Less => p,
                _ => meta.map_value.clone(),
            };
            if active
                && !meta.dominated
                && map_order(new_val.as_ref(), Some(&s)) == std::cmp::Ordering::Greater
            {
                // Dominated accepting states leave the shrink set but stay
                // accepting: they may lie on an undetected cycle.
                meta.dominated = true;
                self.shrink.retain(|e| *e != entry);
                delta = 1;
            }
            let changed =
                map_order(new_val.as_ref(), meta.map_value.as_ref()) == std::cmp::Ordering::Greater;
            if changed || first_visit {
                debug_assert!(
                    changed || meta.map_value.is_none(),
                    "stored map value must grow strictly"
                );
                meta.map_value = new_val.clone();
                let propagate = if active {
                    match map_order(new_val.as_ref(), Some(&s)) {
                        std::cmp::Ordering::Less => Some(s.clone()),
                        _ => new_val,
                    }
                } else {
                    new_val
                };
                if propagate.is_some() || first_visit {
                    forward = Some((propagate, first_visit));
                } else {
                    forward = None;
                }
            } else {
                forward = None;
            }
        }

        if let Some((propagate, first_visit)) = forward {
            let succs = self
                .model
                .successors(&s)
                .map_err(|e| DistError::Corruption(format!("worker {}: {e}", self.id)))?;
            if self.iteration == 1 && first_visit {
                self.transitions += succs.len() as u64;
            }
            for t in succs {
                self.buffer_state(t, propagate.clone(), sink)?;
            }
        }
        Ok(delta)
    }

    fn buffer_state(
        &mut self,
        target: EncodedState,
        map_value: Option<EncodedState>,
        sink: &mut dyn FrameSink,
    ) -> Result<(), DistError> {
        let dst = owner(target.as_bytes(), self.workers);
        self.safra.on_send(1);
        self.sent_states += 1;
        self.out[dst].push(StateMsg { target, map_value });
        if self.out[dst].len() >= self.batch_size {
            let batch = std::mem::take(&mut self.out[dst]);
            sink.send(dst, Frame::States(batch))?;
        }
        Ok(())
    }

    fn flush_buffers(&mut self, sink: &mut dyn FrameSink) -> Result<(), DistError> {
        for dst in 0..self.workers {
            if !self.out[dst].is_empty() {
                let batch = std::mem::take(&mut self.out[dst]);
                sink.send(dst, Frame::States(batch))?;
            }
        }
        Ok(())
    }

    fn broadcast(&mut self, ctrl: ControlMsg, sink: &mut dyn FrameSink) -> Result<(), DistError> {
        for dst in 0..self.workers {
            if dst != self.id {
                sink.send(dst, Frame::Control(ctrl.clone()))?;
            }
        }
        Ok(())
    }

    fn send_token(&mut self, token: Token, sink: &mut dyn FrameSink) -> Result<(), DistError> {
        let succ = (self.id + 1) % self.workers;
        sink.send(succ, Frame::Token(token))
    }

    fn handle_token(
        &mut self,
        token: Token,
        sink: &mut dyn FrameSink,
    ) -> Result<StepReport, DistError> {
        debug_assert!(self.work.is_empty() && self.control.is_empty());
        let outcome = safra::handle_token(
            token,
            &mut self.safra,
            self.id == 0,
            self.dominated_count == 0,
            self.witness.as_ref(),
        );
        match outcome {
            TokenOutcome::Forward(t) => {
                self.send_token(t, sink)?;
                Ok(StepReport::progress(StepAction::TokenForward))
            }
            TokenOutcome::Quiescent {
                dominated_zero,
                cycle_found,
                witness,
            } => {
                self.pending_decision =
                    Some(coordinator_decide(dominated_zero, cycle_found, witness));
                Ok(StepReport {
                    status: StepStatus::Progress,
                    action: StepAction::TokenDetect,
                    detected_quiescence: true,
                })
            }
        }
    }

    /// Shrink becomes exclude, bookkeeping resets, owned initial states
    /// are re-seeded for the next iteration. Message counts persist (see
    /// the module docs of [`crate::safra`]).
    fn apply_iterate(&mut self) {
        let mut newly: Vec<EncodedState> = self
            .shrink
            .drain(..)
            .map(|e| EncodedState::new(self.table.state_bytes(e)))
            .collect();
        newly.sort_unstable();
        for s in &newly {
            let id = self
                .table
                .lookup(s.as_bytes())
                .expect("shrink states are interned");
            self.table.meta_mut(id).excluded = true;
        }
        self.excluded_log.extend(newly);
        self.dominated_count = 0;
        self.flush_mode = false;
        self.iteration += 1;
        self.seed();
        if self.id == 0 {
            self.pending_token_init = true;
        }
    }
}
