//! Packing of multi-field states into fixed-width big-endian byte vectors.
//!
//! Each field gets the minimal number of bytes that holds its value span,
//! fields are concatenated in declaration order.

/// Minimal byte count holding values in `0..=span`.
pub(crate) fn bytes_for_span(span: u64) -> usize {
    let mut width = 1;
    let mut max = 0xffu64;
    while span > max {
        width += 1;
        max = (max << 8) | 0xff;
    }
    width
}

pub(crate) fn write_field(buf: &mut Vec<u8>, value: u64, width: usize) {
    let be = value.to_be_bytes();
    buf.extend_from_slice(&be[8 - width..]);
}

pub(crate) fn read_field(bytes: &[u8], offset: usize, width: usize) -> u64 {
    let mut be = [0u8; 8];
    be[8 - width..].copy_from_slice(&bytes[offset..offset + width]);
    u64::from_be_bytes(be)
}
