//! The transition-system contract and the canonical state codec.
//!
//! A model state is identified by its encoding alone: equal byte vectors
//! are the same state, and every state of a given model encodes to the
//! same fixed width. All algorithms, storage and wire transfer work on
//! [`EncodedState`] values; decoding is a pure function of the bytes and
//! the (immutable) model, never of previously decoded states.

mod builtin;
mod codec;
mod graph;
pub(crate) mod pack;

use std::fmt;

pub use builtin::builtin_model;
pub use codec::{decode_id, encode_id};
pub use graph::{load_graph, ExplicitGraph, GraphParseError, GraphSystem};

/// Canonical fixed-width byte encoding of one model state.
///
/// Byte-wise equality is state equality, and the derived lexicographic
/// ordering is the total order used for maximal-accepting-predecessor
/// comparisons (see `store::map_order`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EncodedState(Box<[u8]>);

impl EncodedState {
    pub fn new(bytes: impl Into<Box<[u8]>>) -> Self {
        EncodedState(bytes.into())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Lowercase hex form, two digits per byte. Used in verdict output.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.0.len() * 2);
        for b in self.0.iter() {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

impl fmt::Debug for EncodedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EncodedState({})", self.to_hex())
    }
}

impl fmt::Display for EncodedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Errors raised by model construction and state decoding.
#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("malformed state: {0}")]
    MalformedState(String),

    #[error("state id {id} does not fit in {width} bytes")]
    IdOverflow { id: u64, width: usize },

    #[error("unknown builtin model `{0}`")]
    UnknownModel(String),

    #[error("parameter `{name}`={value} out of range for {model} (expected {bounds})")]
    ParamOutOfRange {
        model: &'static str,
        name: String,
        value: i64,
        bounds: &'static str,
    },

    #[error("missing parameter `{name}` for builtin model `{model}`")]
    MissingParam { model: &'static str, name: &'static str },

    #[error("unknown parameter `{name}` for builtin model `{model}`")]
    UnknownParam { model: &'static str, name: String },
}

/// Behavioral contract of a finite transition system over encoded states.
///
/// Implementations are immutable after construction and shareable across
/// workers. Successor generation is deterministic (same input, same ordered
/// output) and allocates fresh buffers; every returned successor decodes
/// successfully and re-encodes to itself.
pub trait TransitionSystem: Send + Sync {
    /// Fixed byte width of every encoded state of this model.
    fn state_width(&self) -> usize;

    /// Initial states, in a deterministic order.
    fn initial_states(&self) -> Vec<EncodedState>;

    /// Ordered successor list of `state`.
    fn successors(&self, state: &EncodedState) -> Result<Vec<EncodedState>, ModelError>;

    /// Whether `state` satisfies the acceptance predicate.
    fn is_accepting(&self, state: &EncodedState) -> Result<bool, ModelError>;

    /// Decode `state` and re-encode the result.
    ///
    /// The canonical-codec contract demands `recode(s) == s` for every
    /// reachable `s`, independent of any decode that happened before.
    fn recode(&self, state: &EncodedState) -> Result<EncodedState, ModelError>;

    /// Human-readable form of a decoded state, for diagnostics.
    fn describe(&self, state: &EncodedState) -> Result<String, ModelError>;
}
