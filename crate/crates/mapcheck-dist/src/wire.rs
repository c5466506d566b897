//! Binary frame formats. All integers are big-endian; state fields are
//! the model's fixed width, so the decoder is parameterized by it.
//!
//! ```text
//! STATE   0x00 | count u16 | count x (target, flag u8, [map value])
//! CONTROL 0x01 | code u8 (0 FLUSH, 1 ITERATE, 2 TERMINATE) | wflag u8 | [witness]
//! TOKEN   0x02 | color u8 | q i64 | flags u8 (b0 dominated-zero, b1 cycle) | [witness]
//! STATS   0x03 | worker u16 | owned u64 | transitions u64 | sent u64 | received u64 | excluded u64
//! ```
//!
//! STATE record flag: 0x00 map value BOTTOM, 0x01 map value present.
//! TOKEN carries witness bytes exactly when the cycle bit is set. Over TCP
//! every frame is prefixed with its u32 byte length.

use mapcheck_core::model::EncodedState;

use crate::safra::{Color, Token};

pub const TAG_STATE: u8 = 0x00;
pub const TAG_CONTROL: u8 = 0x01;
pub const TAG_TOKEN: u8 = 0x02;
pub const TAG_STATS: u8 = 0x03;

/// Largest STATE batch one frame can carry.
pub const MAX_BATCH: usize = u16::MAX as usize;

/// One unit of MAP work: a target state and the map value to fold into it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMsg {
    pub target: EncodedState,
    /// Greatest accepting predecessor to propagate; `None` is BOTTOM.
    pub map_value: Option<EncodedState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ControlMsg {
    /// Stop processing states (a cycle was found); the witness is
    /// informational for receivers.
    Flush { witness: Option<EncodedState> },
    /// Apply shrink-to-exclude and start the next iteration.
    Iterate,
    /// Final verdict: witness present means an accepting cycle.
    Terminate { witness: Option<EncodedState> },
}

/// Per-worker statistics reported to the coordinator after TERMINATE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StatsMsg {
    pub worker: u16,
    pub owned_states: u64,
    pub transitions: u64,
    pub sent_states: u64,
    pub received_states: u64,
    pub excluded: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    States(Vec<StateMsg>),
    Control(ControlMsg),
    Token(Token),
    Stats(StatsMsg),
}

impl Frame {
    /// Number of state records carried (for in-flight accounting).
    pub fn state_count(&self) -> u64 {
        match self {
            Frame::States(batch) => batch.len() as u64,
            _ => 0,
        }
    }

    /// Short label for event logs.
    pub fn label(&self) -> String {
        match self {
            Frame::States(batch) => format!("STATE[{}]", batch.len()),
            Frame::Control(ControlMsg::Flush { .. }) => "CONTROL(FLUSH)".into(),
            Frame::Control(ControlMsg::Iterate) => "CONTROL(ITERATE)".into(),
            Frame::Control(ControlMsg::Terminate { .. }) => "CONTROL(TERMINATE)".into(),
            Frame::Token(_) => "TOKEN".into(),
            Frame::Stats(_) => "STATS".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WireError {
    #[error("truncated frame: needed {needed} more bytes")]
    Truncated { needed: usize },

    #[error("unknown frame tag 0x{0:02x}")]
    BadTag(u8),

    #[error("unknown control code {0}")]
    BadControlCode(u8),

    #[error("invalid flag byte 0x{0:02x}")]
    BadFlag(u8),

    #[error("{extra} trailing bytes after frame")]
    TrailingBytes { extra: usize },

    #[error("state batch of {0} exceeds the frame limit")]
    BatchTooLarge(usize),
}

pub fn encode_frame(frame: &Frame, width: usize) -> Result<Vec<u8>, WireError> {
    let mut out = Vec::new();
    match frame {
        Frame::States(batch) => {
            if batch.len() > MAX_BATCH {
                return Err(WireError::BatchTooLarge(batch.len()));
            }
            out.push(TAG_STATE);
            out.extend_from_slice(&(batch.len() as u16).to_be_bytes());
            for msg in batch {
                debug_assert_eq!(msg.target.len(), width);
                out.extend_from_slice(msg.target.as_bytes());
                match &msg.map_value {
                    None => out.push(0x00),
                    Some(v) => {
                        debug_assert_eq!(v.len(), width);
                        out.push(0x01);
                        out.extend_from_slice(v.as_bytes());
                    }
                }
            }
        }
        Frame::Control(ctrl) => {
            out.push(TAG_CONTROL);
            let (code, witness) = match ctrl {
                ControlMsg::Flush { witness } => (0u8, witness.as_ref()),
                ControlMsg::Iterate => (1, None),
                ControlMsg::Terminate { witness } => (2, witness.as_ref()),
            };
            out.push(code);
            match witness {
                None => out.push(0x00),
                Some(w) => {
                    out.push(0x01);
                    out.extend_from_slice(w.as_bytes());
                }
            }
        }
        Frame::Token(token) => {
            out.push(TAG_TOKEN);
            out.push(match token.color {
                Color::White => 0,
                Color::Black => 1,
            });
            out.extend_from_slice(&token.q.to_be_bytes());
            let mut flags = 0u8;
            if token.global_dominated_zero {
                flags |= 0x01;
            }
            if token.cycle_found {
                flags |= 0x02;
            }
            out.push(flags);
            if token.cycle_found {
                let w = token
                    .witness
                    .as_ref()
                    .expect("cycle_found tokens carry a witness");
                out.extend_from_slice(w.as_bytes());
            }
        }
        Frame::Stats(stats) => {
            out.push(TAG_STATS);
            out.extend_from_slice(&stats.worker.to_be_bytes());
            for v in [
                stats.owned_states,
                stats.transitions,
                stats.sent_states,
                stats.received_states,
                stats.excluded,
            ] {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], WireError> {
        if self.at + n > self.bytes.len() {
            return Err(WireError::Truncated {
                needed: self.at + n - self.bytes.len(),
            });
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, WireError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, WireError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn u64(&mut self) -> Result<u64, WireError> {
        let b = self.take(8)?;
        Ok(u64::from_be_bytes(b.try_into().expect("8 bytes")))
    }

    fn i64(&mut self) -> Result<i64, WireError> {
        let b = self.take(8)?;
        Ok(i64::from_be_bytes(b.try_into().expect("8 bytes")))
    }

    fn state(&mut self, width: usize) -> Result<EncodedState, WireError> {
        Ok(EncodedState::new(self.take(width)?))
    }

    fn finish(self) -> Result<(), WireError> {
        if self.at != self.bytes.len() {
            return Err(WireError::TrailingBytes {
                extra: self.bytes.len() - self.at,
            });
        }
        Ok(())
    }
}

pub fn decode_frame(bytes: &[u8], width: usize) -> Result<Frame, WireError> {
    let mut r = Reader { bytes, at: 0 };
    let frame = match r.u8()? {
        TAG_STATE => {
            let count = r.u16()? as usize;
            let mut batch = Vec::with_capacity(count);
            for _ in 0..count {
                let target = r.state(width)?;
                let map_value = match r.u8()? {
                    0x00 => None,
                    0x01 => Some(r.state(width)?),
                    bad => return Err(WireError::BadFlag(bad)),
                };
                batch.push(StateMsg { target, map_value });
            }
            Frame::States(batch)
        }
        TAG_CONTROL => {
            let code = r.u8()?;
            let witness = match r.u8()? {
                0x00 => None,
                0x01 => Some(r.state(width)?),
                bad => return Err(WireError::BadFlag(bad)),
            };
            Frame::Control(match code {
                0 => ControlMsg::Flush { witness },
                1 => ControlMsg::Iterate,
                2 => ControlMsg::Terminate { witness },
                bad => return Err(WireError::BadControlCode(bad)),
            })
        }
        TAG_TOKEN => {
            let color = match r.u8()? {
                0 => Color::White,
                1 => Color::Black,
                bad => return Err(WireError::BadFlag(bad)),
            };
            let q = r.i64()?;
            let flags = r.u8()?;
            if flags & !0x03 != 0 {
                return Err(WireError::BadFlag(flags));
            }
            let cycle_found = flags & 0x02 != 0;
            let witness = if cycle_found { Some(r.state(width)?) } else { None };
            Frame::Token(Token {
                color,
                q,
                global_dominated_zero: flags & 0x01 != 0,
                cycle_found,
                witness,
            })
        }
        TAG_STATS => Frame::Stats(StatsMsg {
            worker: r.u16()?,
            owned_states: r.u64()?,
            transitions: r.u64()?,
            sent_states: r.u64()?,
            received_states: r.u64()?,
            excluded: r.u64()?,
        }),
        bad => return Err(WireError::BadTag(bad)),
    };
    r.finish()?;
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn state_frame_layout_is_bit_exact() {
        let frame = Frame::States(vec![
            StateMsg {
                target: EncodedState::new(vec![0, 0, 0, 3]),
                map_value: None,
            },
            StateMsg {
                target: EncodedState::new(vec![0, 0, 0, 1]),
                map_value: Some(EncodedState::new(vec![0, 0, 0, 4])),
            },
        ]);
        let bytes = encode_frame(&frame, 4).unwrap();
        assert_eq!(
            bytes,
            vec![
                0x00, 0x00, 0x02, // tag, count 2
                0, 0, 0, 3, 0x00, // record 1: target 3, BOTTOM
                0, 0, 0, 1, 0x01, 0, 0, 0, 4, // record 2: target 1, map 4
            ]
        );
    }

    #[test]
    fn control_frame_layout_is_bit_exact() {
        let bytes = encode_frame(&Frame::Control(ControlMsg::Iterate), 4).unwrap();
        assert_eq!(bytes, vec![0x01, 1, 0x00]);
        let bytes = encode_frame(
            &Frame::Control(ControlMsg::Terminate {
                witness: Some(EncodedState::new(vec![0, 0, 0, 2])),
            }),
            4,
        )
        .unwrap();
        assert_eq!(bytes, vec![0x01, 2, 0x01, 0, 0, 0, 2]);
    }

    #[test]
    fn token_frame_layout_is_bit_exact() {
        let token = Token {
            color: Color::Black,
            q: -2,
            global_dominated_zero: true,
            cycle_found: false,
            witness: None,
        };
        let bytes = encode_frame(&Frame::Token(token), 4).unwrap();
        assert_eq!(bytes[0], 0x02);
        assert_eq!(bytes[1], 1); // black
        assert_eq!(&bytes[2..10], &(-2i64).to_be_bytes());
        assert_eq!(bytes[10], 0x01);
        assert_eq!(bytes.len(), 11);
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(decode_frame(&[0x07], 4), Err(WireError::BadTag(0x07))));
        assert!(matches!(
            decode_frame(&[0x00, 0x00, 0x01, 0, 0], 4),
            Err(WireError::Truncated { .. })
        ));
        assert!(matches!(
            decode_frame(&[0x01, 9, 0x00], 4),
            Err(WireError::BadControlCode(9))
        ));
        let mut ok = encode_frame(&Frame::Control(ControlMsg::Iterate), 4).unwrap();
        ok.push(0xff);
        assert!(matches!(
            decode_frame(&ok, 4),
            Err(WireError::TrailingBytes { extra: 1 })
        ));
    }

    fn arb_state(width: usize) -> impl Strategy<Value = EncodedState> {
        proptest::collection::vec(any::<u8>(), width).prop_map(EncodedState::new)
    }

    fn arb_frame(width: usize) -> impl Strategy<Value = Frame> {
        let state_msg = (arb_state(width), proptest::option::of(arb_state(width)))
            .prop_map(|(target, map_value)| StateMsg { target, map_value });
        prop_oneof![
            proptest::collection::vec(state_msg, 0..20).prop_map(Frame::States),
            proptest::option::of(arb_state(width))
                .prop_map(|witness| Frame::Control(ControlMsg::Flush { witness })),
            Just(Frame::Control(ControlMsg::Iterate)),
            proptest::option::of(arb_state(width))
                .prop_map(|witness| Frame::Control(ControlMsg::Terminate { witness })),
            (any::<bool>(), any::<i64>(), any::<bool>(), proptest::option::of(arb_state(width)))
                .prop_map(|(black, q, gdz, witness)| {
                    Frame::Token(Token {
                        color: if black { Color::Black } else { Color::White },
                        q,
                        global_dominated_zero: gdz,
                        cycle_found: witness.is_some(),
                        witness,
                    })
                }),
            (any::<u16>(), any::<u64>(), any::<u64>(), any::<u64>(), any::<u64>(), any::<u64>())
                .prop_map(|(worker, owned_states, transitions, sent_states, received_states, excluded)| {
                    Frame::Stats(StatsMsg {
                        worker,
                        owned_states,
                        transitions,
                        sent_states,
                        received_states,
                        excluded,
                    })
                }),
        ]
    }

    proptest! {
        #[test]
        fn roundtrips(frame in arb_frame(4)) {
            let bytes = encode_frame(&frame, 4).unwrap();
            prop_assert_eq!(decode_frame(&bytes, 4).unwrap(), frame);
        }

        #[test]
        fn roundtrips_wide_states(frame in arb_frame(7)) {
            let bytes = encode_frame(&frame, 7).unwrap();
            prop_assert_eq!(decode_frame(&bytes, 7).unwrap(), frame);
        }
    }
}
