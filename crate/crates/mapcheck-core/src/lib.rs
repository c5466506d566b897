//! Core building blocks for explicit-state accepting-cycle checking:
//! transition systems over canonical fixed-width state vectors, an
//! explicit-graph file format, a small guarded-command modeling language,
//! the per-worker state store with partition hashing, and the sequential
//! reference algorithms (BFS, DFS, nested DFS, sequential MAP).

pub mod baselines;
pub mod corpus;
pub mod gcl;
pub mod model;
pub mod store;

pub use model::{EncodedState, ModelError, TransitionSystem};
