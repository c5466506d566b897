//! Distributed maximal-accepting-predecessors (MAP) accepting-cycle search.
//!
//! States are hash-partitioned over workers; each worker runs a sequential
//! event loop processing three prioritized queues (control, work, tokens),
//! ships successors to their owners, and participates in a ring-based
//! termination detection derived from Safra's algorithm. Worker 0 doubles
//! as coordinator: on global quiescence it decides between starting the
//! next iteration and terminating with a verdict.
//!
//! Workers can run under a deterministic in-process simulator ([`sim`]) or
//! as separate OS processes over TCP ([`tcp`]).

pub mod safra;
pub mod sim;
pub mod tcp;
pub mod wire;
pub mod worker;

pub use sim::{run_sim, SimOptions, SimOutput, SimPolicy};
pub use tcp::{run_tcp, TcpConfig};
pub use worker::{
    coordinator_decide, Mode, RunResult, Verdict, Worker, WorkerConfig, WorkerStats,
};

use mapcheck_core::model::ModelError;
use mapcheck_core::store::StoreError;

/// Failures of a distributed run.
#[derive(Debug, thiserror::Error)]
pub enum DistError {
    #[error("state cap of {cap} exceeded on worker {worker}")]
    StateCapExceeded { worker: usize, cap: u64 },

    #[error("protocol corruption: {0}")]
    Corruption(String),

    #[error("protocol stall: {0}")]
    Stall(String),

    #[error("transport failure: {0}")]
    Transport(String),

    #[error("handshake failed: {0}")]
    Handshake(String),

    #[error("bad configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Wire(#[from] wire::WireError),

    #[error(transparent)]
    Model(#[from] ModelError),
}

impl DistError {
    pub(crate) fn from_store(err: StoreError, worker: usize) -> Self {
        match err {
            StoreError::CapacityExceeded { limit } => DistError::StateCapExceeded {
                worker,
                cap: limit,
            },
        }
    }
}
