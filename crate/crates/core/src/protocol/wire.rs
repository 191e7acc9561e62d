//! Binary message dump: sender (16 bits), round (8 bits), one
//! sign-magnitude slot per sensor (1 + ceil(log2 m) bits), aggregate as
//! IEEE-754 f64 (64 bits). Fields are packed back to back, least
//! significant bit first, and the tail is zero-padded to a whole byte.

use bitvec::prelude::*;

use super::{AggregateMessage, Cap, ProtocolError};

const SENDER_BITS: usize = 16;
const ROUND_BITS: usize = 8;

fn err(message: impl Into<String>) -> ProtocolError {
    ProtocolError::Wire(message.into())
}

/// Packed size in bits, before byte padding.
pub fn wire_bits(n: usize, cap: Cap) -> usize {
    SENDER_BITS + ROUND_BITS + n * (1 + cap.magnitude_bits() as usize) + 64
}

pub fn encode_message(msg: &AggregateMessage, cap: Cap) -> Result<Vec<u8>, ProtocolError> {
    if msg.sender >= 1 << SENDER_BITS {
        return Err(err(format!("sender {} does not fit in 16 bits", msg.sender)));
    }
    if msg.round == 0 || msg.round >= 1 << ROUND_BITS {
        return Err(err(format!("round {} outside 1..=255", msg.round)));
    }
    let mag_bits = cap.magnitude_bits() as usize;
    let n = msg.coeff_row.len();
    let mut bits = bitvec![u8, Lsb0; 0; wire_bits(n, cap).div_ceil(8) * 8];
    bits[..16].store_le(msg.sender as u16);
    bits[16..24].store_le(msg.round as u8);
    let mut at = SENDER_BITS + ROUND_BITS;
    for &b in &msg.coeff_row {
        let magnitude = b.unsigned_abs();
        if !cap.admits_magnitude(magnitude) {
            return Err(err(format!("coefficient {b} exceeds the cap")));
        }
        bits.set(at, b < 0);
        bits[at + 1..at + 1 + mag_bits].store_le(magnitude);
        at += 1 + mag_bits;
    }
    bits[at..at + 64].store_le(msg.aggregate.to_bits());
    Ok(bits.into_vec())
}

/// Inverse of [`encode_message`]; the sensor count and cap are not on the
/// wire and must be known. Rejects non-canonical input (negative zero,
/// nonzero padding, wrong length) so decode/encode round-trips exactly.
pub fn decode_message(bytes: &[u8], n: usize, cap: Cap) -> Result<AggregateMessage, ProtocolError> {
    let total = wire_bits(n, cap);
    if bytes.len() != total.div_ceil(8) {
        return Err(err(format!("expected {} bytes, got {}", total.div_ceil(8), bytes.len())));
    }
    let bits = bytes.view_bits::<Lsb0>();
    if bits[total..].any() {
        return Err(err("nonzero padding"));
    }
    let sender: u16 = bits[..16].load_le();
    let round: u8 = bits[16..24].load_le();
    if round == 0 {
        return Err(err("round 0"));
    }
    let mag_bits = cap.magnitude_bits() as usize;
    let mut coeff_row = Vec::with_capacity(n);
    let mut at = SENDER_BITS + ROUND_BITS;
    for slot in 0..n {
        let negative = bits[at];
        let magnitude: u64 = bits[at + 1..at + 1 + mag_bits].load_le();
        if !cap.admits_magnitude(magnitude) {
            return Err(err(format!("slot {slot}: magnitude {magnitude} exceeds the cap")));
        }
        if negative && magnitude == 0 {
            return Err(err(format!("slot {slot}: negative zero")));
        }
        let value = magnitude as i64;
        coeff_row.push(if negative { -value } else { value });
        at += 1 + mag_bits;
    }
    let aggregate = f64::from_bits(bits[at..at + 64].load_le());
    Ok(AggregateMessage {
        sender: sender as usize,
        round: round as usize,
        coeff_row,
        aggregate,
        payload_bits: cap.payload_bits(n),
    })
}
