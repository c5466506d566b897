//! Fixed-width big-endian id codec.
//!
//! Big-endian keeps numeric order of ids equal to lexicographic order of
//! their encodings, so MAP-order reasoning on graph models can be done by
//! eye ("state 4 beats state 2").

use super::{EncodedState, ModelError};

/// Encode `id` as a fixed-width big-endian byte vector.
pub fn encode_id(id: u64, width: usize) -> Result<EncodedState, ModelError> {
    if width < 8 && id >= 1u64 << (8 * width) {
        return Err(ModelError::IdOverflow { id, width });
    }
    let be = id.to_be_bytes();
    Ok(EncodedState::new(&be[8 - width..]))
}

/// Decode a fixed-width big-endian byte vector back to the id.
pub fn decode_id(state: &EncodedState, width: usize) -> Result<u64, ModelError> {
    let bytes = state.as_bytes();
    if bytes.len() != width {
        return Err(ModelError::MalformedState(format!(
            "expected {} bytes, got {}",
            width,
            bytes.len()
        )));
    }
    if width > 8 {
        return Err(ModelError::MalformedState(format!(
            "id width {width} exceeds 8 bytes"
        )));
    }
    let mut be = [0u8; 8];
    be[8 - width..].copy_from_slice(bytes);
    Ok(u64::from_be_bytes(be))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn encodes_fixed_width_big_endian() {
        assert_eq!(encode_id(4, 4).unwrap().as_bytes(), &[0, 0, 0, 4]);
        assert_eq!(encode_id(0, 4).unwrap().as_bytes(), &[0, 0, 0, 0]);
        assert_eq!(encode_id(0x0102, 2).unwrap().as_bytes(), &[1, 2]);
    }

    #[test]
    fn rejects_overflowing_id() {
        assert!(matches!(
            encode_id(256, 1),
            Err(ModelError::IdOverflow { id: 256, width: 1 })
        ));
        assert!(encode_id(255, 1).is_ok());
    }

    #[test]
    fn rejects_wrong_length() {
        let three = EncodedState::new(vec![0u8, 0, 1]);
        assert!(matches!(
            decode_id(&three, 4),
            Err(ModelError::MalformedState(_))
        ));
    }

    proptest! {
        #[test]
        fn numeric_order_matches_lexicographic(a in 0u64..1 << 31, b in 0u64..1 << 31) {
            let ea = encode_id(a, 4).unwrap();
            let eb = encode_id(b, 4).unwrap();
            prop_assert_eq!(a.cmp(&b), ea.as_bytes().cmp(eb.as_bytes()));
        }

        #[test]
        fn roundtrips(id in 0u64..1 << 31) {
            let e = encode_id(id, 4).unwrap();
            prop_assert_eq!(decode_id(&e, 4).unwrap(), id);
        }
    }
}
