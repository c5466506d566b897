//! Ring-based termination detection, following Safra's counting scheme
//! (EWD 998) with two extensions for the MAP protocol: the token also
//! AND-accumulates "no accepting state was dominated" and OR-accumulates
//! "a cycle witness exists", so the initiator can decide ITERATE versus
//! TERMINATE the moment quiescence is detected.
//!
//! Counting rules: sending a state message increments the local count,
//! receiving one decrements it and blackens the worker. A worker forwards
//! the token only when its work and control queues are empty, folding in
//! its count, color and summary; forwarding whitens it. The initiator
//! (worker 0) detects quiescence when the returned token is white, the
//! initiator itself is white, and the accumulated count plus its own is
//! zero; otherwise it immediately re-initiates a fresh white token.
//!
//! Counts deliberately persist across MAP iterations: new-iteration state
//! messages can arrive before the ITERATE control message is processed,
//! and resetting counts at ITERATE would lose those receipts. Conservation
//! keeps the invariant "sum of counts == messages in flight" at all times.

use mapcheck_core::model::EncodedState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    White,
    Black,
}

/// Per-worker termination-detection state.
#[derive(Debug, Clone)]
pub struct SafraLocal {
    /// State messages sent minus received.
    pub message_count: i64,
    pub color: Color,
}

impl Default for SafraLocal {
    fn default() -> Self {
        Self::new()
    }
}

impl SafraLocal {
    pub fn new() -> Self {
        SafraLocal {
            message_count: 0,
            color: Color::White,
        }
    }

    /// Account for `n` state messages sent (a batch of k counts k).
    pub fn on_send(&mut self, n: u64) {
        self.message_count += n as i64;
    }

    /// Account for `n` state messages received; any receipt blackens.
    pub fn on_receive(&mut self, n: u64) {
        self.message_count -= n as i64;
        self.color = Color::Black;
    }
}

/// The circulating token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub color: Color,
    /// Accumulated message counts of the workers passed since initiation.
    pub q: i64,
    /// AND over passed workers of "dominated nothing this iteration".
    pub global_dominated_zero: bool,
    /// OR over passed workers of "holds a cycle witness".
    pub cycle_found: bool,
    /// First witness attached; present iff `cycle_found`.
    pub witness: Option<EncodedState>,
}

/// What to do with a token at this worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenOutcome {
    /// Pass to the ring successor.
    Forward(Token),
    /// Initiator only: global quiescence established.
    Quiescent {
        dominated_zero: bool,
        cycle_found: bool,
        witness: Option<EncodedState>,
    },
}

/// Create (or re-create) a token at the initiator, whitening it and
/// seeding the summary from its local state.
pub fn fresh_token(
    local: &mut SafraLocal,
    local_dominated_zero: bool,
    local_witness: Option<&EncodedState>,
) -> Token {
    local.color = Color::White;
    Token {
        color: Color::White,
        q: 0,
        global_dominated_zero: local_dominated_zero,
        cycle_found: local_witness.is_some(),
        witness: local_witness.cloned(),
    }
}

/// Process a token at a worker whose work and control queues are empty.
pub fn handle_token(
    mut token: Token,
    local: &mut SafraLocal,
    initiator: bool,
    local_dominated_zero: bool,
    local_witness: Option<&EncodedState>,
) -> TokenOutcome {
    if initiator {
        if token.color == Color::White
            && local.color == Color::White
            && token.q + local.message_count == 0
        {
            // The initiator's own summary was folded in at initiation; any
            // change since then implies a receipt, which would have
            // blackened it. Fold current values anyway for robustness.
            TokenOutcome::Quiescent {
                dominated_zero: token.global_dominated_zero && local_dominated_zero,
                cycle_found: token.cycle_found || local_witness.is_some(),
                witness: token.witness.or_else(|| local_witness.cloned()),
            }
        } else {
            TokenOutcome::Forward(fresh_token(local, local_dominated_zero, local_witness))
        }
    } else {
        token.q += local.message_count;
        if local.color == Color::Black {
            token.color = Color::Black;
        }
        token.global_dominated_zero &= local_dominated_zero;
        if local_witness.is_some() {
            if token.witness.is_none() {
                token.witness = local_witness.cloned();
            }
            token.cycle_found = true;
        }
        local.color = Color::White;
        TokenOutcome::Forward(token)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mapcheck_core::model::encode_id;

    #[test]
    fn balanced_counts_leave_zero_and_black() {
        let mut local = SafraLocal::new();
        local.on_send(1);
        local.on_send(1);
        local.on_send(1);
        local.on_receive(1);
        local.on_receive(1);
        local.on_receive(1);
        assert_eq!(local.message_count, 0);
        assert_eq!(local.color, Color::Black);
    }

    #[test]
    fn batch_of_k_counts_k() {
        let mut sender = SafraLocal::new();
        let mut receiver = SafraLocal::new();
        sender.on_send(5);
        receiver.on_receive(5);
        assert_eq!(sender.message_count, 5);
        assert_eq!(receiver.message_count, -5);
        assert_eq!(sender.message_count + receiver.message_count, 0);
    }

    #[test]
    fn single_worker_detects_immediately_when_idle_and_white() {
        let mut local = SafraLocal::new();
        let token = fresh_token(&mut local, true, None);
        let outcome = handle_token(token, &mut local, true, true, None);
        assert_eq!(
            outcome,
            TokenOutcome::Quiescent {
                dominated_zero: true,
                cycle_found: false,
                witness: None
            }
        );
    }

    #[test]
    fn outstanding_message_blocks_detection_and_reinitiates() {
        // Two workers; worker 1 sent one message that is still in flight.
        let mut w0 = SafraLocal::new();
        let mut w1 = SafraLocal::new();
        w1.on_send(1);

        let token = fresh_token(&mut w0, true, None);
        let outcome = handle_token(token, &mut w1, false, true, None);
        let TokenOutcome::Forward(token) = outcome else {
            panic!("non-initiator always forwards")
        };
        assert_eq!(token.q, 1);

        // Back at the initiator: q + count_0 = 1, no detection.
        let outcome = handle_token(token, &mut w0, true, true, None);
        match outcome {
            TokenOutcome::Forward(fresh) => {
                assert_eq!(fresh.q, 0);
                assert_eq!(fresh.color, Color::White);
            }
            other => panic!("expected re-initiation, got {other:?}"),
        }
    }

    #[test]
    fn receipt_after_forwarding_blackens_next_circuit() {
        let mut w0 = SafraLocal::new();
        let mut w1 = SafraLocal::new();
        // Circuit 1: w1 forwards while white, then receives a message.
        let token = fresh_token(&mut w0, true, None);
        let TokenOutcome::Forward(token) = handle_token(token, &mut w1, false, true, None) else {
            panic!()
        };
        w0.on_send(1);
        w1.on_receive(1);
        // Initiator is black now (no receive, but its count is +1).
        let TokenOutcome::Forward(token) = handle_token(token, &mut w0, true, true, None) else {
            panic!("count imbalance must block detection")
        };
        // Circuit 2: w1 is black; token blackens; no detection.
        let TokenOutcome::Forward(token) = handle_token(token, &mut w1, false, true, None) else {
            panic!()
        };
        assert_eq!(token.color, Color::Black);
        assert_eq!(token.q + w0.message_count, 0);
        let TokenOutcome::Forward(token) = handle_token(token, &mut w0, true, true, None) else {
            panic!("black token must block detection")
        };
        // Circuit 3: everything white and balanced, detection fires.
        let TokenOutcome::Forward(token) = handle_token(token, &mut w1, false, true, None) else {
            panic!()
        };
        let outcome = handle_token(token, &mut w0, true, true, None);
        assert!(matches!(outcome, TokenOutcome::Quiescent { .. }));
    }

    #[test]
    fn summary_fields_accumulate() {
        let witness = encode_id(2, 4).unwrap();
        let mut w0 = SafraLocal::new();
        let mut w1 = SafraLocal::new();
        let mut w2 = SafraLocal::new();
        let token = fresh_token(&mut w0, true, None);
        // Worker 1 dominated something; worker 2 found a cycle.
        let TokenOutcome::Forward(token) = handle_token(token, &mut w1, false, false, None) else {
            panic!()
        };
        let TokenOutcome::Forward(token) =
            handle_token(token, &mut w2, false, true, Some(&witness))
        else {
            panic!()
        };
        assert!(!token.global_dominated_zero);
        assert!(token.cycle_found);
        let outcome = handle_token(token, &mut w0, true, true, None);
        assert_eq!(
            outcome,
            TokenOutcome::Quiescent {
                dominated_zero: false,
                cycle_found: true,
                witness: Some(witness)
            }
        );
    }

    #[test]
    fn first_witness_wins() {
        let w_a = encode_id(7, 4).unwrap();
        let w_b = encode_id(9, 4).unwrap();
        let mut w1 = SafraLocal::new();
        let mut w2 = SafraLocal::new();
        let mut w0 = SafraLocal::new();
        let token = fresh_token(&mut w0, true, None);
        let TokenOutcome::Forward(token) = handle_token(token, &mut w1, false, true, Some(&w_a))
        else {
            panic!()
        };
        let TokenOutcome::Forward(token) = handle_token(token, &mut w2, false, true, Some(&w_b))
        else {
            panic!()
        };
        assert_eq!(token.witness, Some(w_a));
    }
}
