//! Built-in parametric models, generated programmatically.
//!
//! These provide deterministic, scalable stand-ins for classic benchmark
//! shapes:
//!
//! * `readers_writers(R, W, ERROR)` — a readers/writers protocol counting
//!   active readers (0..=R) and writers (0..=W). With `ERROR=1` the writer
//!   ignores active readers when entering, making the mutual-exclusion
//!   violation (`r > 0 && w > 0`) reachable and part of a cycle; with
//!   `ERROR=0` no accepting cycle exists.
//! * `token_ring(N)` — a token circulating over N stations, each doing one
//!   unit of work before passing it on; accepting when the token is at
//!   station 0 (the token returns there forever, so a cycle always exists).
//! * `counter_cycle(N)` — a modular counter 0..N-1 with state 0 accepting;
//!   the minimal accepting-lasso family.

use std::collections::BTreeMap;

use super::pack::{bytes_for_span, read_field, write_field};
use super::{EncodedState, ModelError, TransitionSystem};

/// Instantiate a built-in model by name.
///
/// Parameter keys are case-insensitive (`R`, `W`, `ERROR`, `N`).
pub fn builtin_model(
    name: &str,
    params: &BTreeMap<String, i64>,
) -> Result<Box<dyn TransitionSystem>, ModelError> {
    let mut normalized = BTreeMap::new();
    for (k, v) in params {
        let key = k.to_ascii_uppercase();
        if normalized.insert(key, *v).is_some() {
            return Err(ModelError::UnknownParam {
                model: "builtin",
                name: format!("duplicate parameter `{k}`"),
            });
        }
    }
    match name {
        "readers_writers" => {
            let r = take_param(&mut normalized, "readers_writers", "R")?;
            let w = take_param(&mut normalized, "readers_writers", "W")?;
            let error = take_param(&mut normalized, "readers_writers", "ERROR")?;
            reject_leftovers("readers_writers", &normalized)?;
            check_range("readers_writers", "R", r, 1, 1_000_000)?;
            check_range("readers_writers", "W", w, 1, 1_000_000)?;
            check_range("readers_writers", "ERROR", error, 0, 1)?;
            Ok(Box::new(ReadersWriters::new(r as u64, w as u64, error == 1)))
        }
        "token_ring" => {
            let n = take_param(&mut normalized, "token_ring", "N")?;
            reject_leftovers("token_ring", &normalized)?;
            check_range("token_ring", "N", n, 1, 1_000_000)?;
            Ok(Box::new(TokenRing::new(n as u64)))
        }
        "counter_cycle" => {
            let n = take_param(&mut normalized, "counter_cycle", "N")?;
            reject_leftovers("counter_cycle", &normalized)?;
            check_range("counter_cycle", "N", n, 1, 100_000_000)?;
            Ok(Box::new(CounterCycle::new(n as u64)))
        }
        other => Err(ModelError::UnknownModel(other.to_string())),
    }
}

fn take_param(
    params: &mut BTreeMap<String, i64>,
    model: &'static str,
    name: &'static str,
) -> Result<i64, ModelError> {
    params
        .remove(name)
        .ok_or(ModelError::MissingParam { model, name })
}

fn reject_leftovers(model: &'static str, params: &BTreeMap<String, i64>) -> Result<(), ModelError> {
    if let Some(name) = params.keys().next() {
        return Err(ModelError::UnknownParam {
            model,
            name: name.clone(),
        });
    }
    Ok(())
}

fn check_range(
    model: &'static str,
    name: &str,
    value: i64,
    lo: i64,
    hi: i64,
) -> Result<(), ModelError> {
    if value < lo || value > hi {
        return Err(ModelError::ParamOutOfRange {
            model,
            name: name.to_string(),
            value,
            bounds: match (lo, hi) {
                (0, 1) => "0..=1",
                (1, 1_000_000) => "1..=1000000",
                _ => "1..=100000000",
            },
        });
    }
    Ok(())
}

/// Readers/writers counter model; see module docs for the dynamics.
pub struct ReadersWriters {
    r_max: u64,
    w_max: u64,
    buggy_writer: bool,
    r_width: usize,
    w_width: usize,
}

impl ReadersWriters {
    fn new(r_max: u64, w_max: u64, buggy_writer: bool) -> Self {
        ReadersWriters {
            r_max,
            w_max,
            buggy_writer,
            r_width: bytes_for_span(r_max),
            w_width: bytes_for_span(w_max),
        }
    }

    fn decode(&self, state: &EncodedState) -> Result<(u64, u64), ModelError> {
        let bytes = state.as_bytes();
        if bytes.len() != self.state_width() {
            return Err(ModelError::MalformedState(format!(
                "expected {} bytes, got {}",
                self.state_width(),
                bytes.len()
            )));
        }
        let r = read_field(bytes, 0, self.r_width);
        let w = read_field(bytes, self.r_width, self.w_width);
        if r > self.r_max || w > self.w_max {
            return Err(ModelError::MalformedState(format!(
                "counters ({r},{w}) out of bounds ({},{})",
                self.r_max, self.w_max
            )));
        }
        Ok((r, w))
    }

    fn encode(&self, r: u64, w: u64) -> EncodedState {
        let mut buf = Vec::with_capacity(self.state_width());
        write_field(&mut buf, r, self.r_width);
        write_field(&mut buf, w, self.w_width);
        EncodedState::new(buf)
    }
}

impl TransitionSystem for ReadersWriters {
    fn state_width(&self) -> usize {
        self.r_width + self.w_width
    }

    fn initial_states(&self) -> Vec<EncodedState> {
        vec![self.encode(0, 0)]
    }

    fn successors(&self, state: &EncodedState) -> Result<Vec<EncodedState>, ModelError> {
        let (r, w) = self.decode(state)?;
        let mut out = Vec::with_capacity(4);
        // Reader enter / exit, then writer enter / exit; the buggy writer
        // drops the "no active readers" condition.
        if w == 0 && r < self.r_max {
            out.push(self.encode(r + 1, w));
        }
        if r > 0 {
            out.push(self.encode(r - 1, w));
        }
        let writer_may_enter = if self.buggy_writer { w == 0 } else { w == 0 && r == 0 };
        if writer_may_enter && w < self.w_max {
            out.push(self.encode(r, w + 1));
        }
        if w > 0 {
            out.push(self.encode(r, w - 1));
        }
        Ok(out)
    }

    fn is_accepting(&self, state: &EncodedState) -> Result<bool, ModelError> {
        let (r, w) = self.decode(state)?;
        Ok(r > 0 && w > 0)
    }

    fn recode(&self, state: &EncodedState) -> Result<EncodedState, ModelError> {
        let (r, w) = self.decode(state)?;
        Ok(self.encode(r, w))
    }

    fn describe(&self, state: &EncodedState) -> Result<String, ModelError> {
        let (r, w) = self.decode(state)?;
        Ok(format!("readers={r} writers={w}"))
    }
}

/// Token ring; state is (token position, work flag).
pub struct TokenRing {
    n: u64,
    t_width: usize,
}

impl TokenRing {
    fn new(n: u64) -> Self {
        TokenRing {
            n,
            t_width: bytes_for_span(n - 1),
        }
    }

    fn decode(&self, state: &EncodedState) -> Result<(u64, u64), ModelError> {
        let bytes = state.as_bytes();
        if bytes.len() != self.state_width() {
            return Err(ModelError::MalformedState(format!(
                "expected {} bytes, got {}",
                self.state_width(),
                bytes.len()
            )));
        }
        let t = read_field(bytes, 0, self.t_width);
        let f = read_field(bytes, self.t_width, 1);
        if t >= self.n || f > 1 {
            return Err(ModelError::MalformedState(format!(
                "station {t} flag {f} out of bounds (ring size {})",
                self.n
            )));
        }
        Ok((t, f))
    }

    fn encode(&self, t: u64, f: u64) -> EncodedState {
        let mut buf = Vec::with_capacity(self.state_width());
        write_field(&mut buf, t, self.t_width);
        write_field(&mut buf, f, 1);
        EncodedState::new(buf)
    }
}

impl TransitionSystem for TokenRing {
    fn state_width(&self) -> usize {
        self.t_width + 1
    }

    fn initial_states(&self) -> Vec<EncodedState> {
        vec![self.encode(0, 0)]
    }

    fn successors(&self, state: &EncodedState) -> Result<Vec<EncodedState>, ModelError> {
        let (t, f) = self.decode(state)?;
        Ok(if f == 0 {
            vec![self.encode(t, 1)]
        } else {
            vec![self.encode((t + 1) % self.n, 0)]
        })
    }

    fn is_accepting(&self, state: &EncodedState) -> Result<bool, ModelError> {
        let (t, _) = self.decode(state)?;
        Ok(t == 0)
    }

    fn recode(&self, state: &EncodedState) -> Result<EncodedState, ModelError> {
        let (t, f) = self.decode(state)?;
        Ok(self.encode(t, f))
    }

    fn describe(&self, state: &EncodedState) -> Result<String, ModelError> {
        let (t, f) = self.decode(state)?;
        Ok(format!("token at {t}, {}", if f == 0 { "idle" } else { "busy" }))
    }
}

/// Modular counter with an accepting reset state.
pub struct CounterCycle {
    n: u64,
}

impl CounterCycle {
    fn new(n: u64) -> Self {
        CounterCycle { n }
    }

    fn decode(&self, state: &EncodedState) -> Result<u64, ModelError> {
        let c = super::codec::decode_id(state, 4)?;
        if c >= self.n {
            return Err(ModelError::MalformedState(format!(
                "counter {c} out of bounds (modulus {})",
                self.n
            )));
        }
        Ok(c)
    }
}

impl TransitionSystem for CounterCycle {
    fn state_width(&self) -> usize {
        4
    }

    fn initial_states(&self) -> Vec<EncodedState> {
        vec![super::codec::encode_id(0, 4).unwrap()]
    }

    fn successors(&self, state: &EncodedState) -> Result<Vec<EncodedState>, ModelError> {
        let c = self.decode(state)?;
        Ok(vec![super::codec::encode_id((c + 1) % self.n, 4).unwrap()])
    }

    fn is_accepting(&self, state: &EncodedState) -> Result<bool, ModelError> {
        Ok(self.decode(state)? == 0)
    }

    fn recode(&self, state: &EncodedState) -> Result<EncodedState, ModelError> {
        Ok(super::codec::encode_id(self.decode(state)?, 4).unwrap())
    }

    fn describe(&self, state: &EncodedState) -> Result<String, ModelError> {
        Ok(format!("counter {}", self.decode(state)?))
    }
}
