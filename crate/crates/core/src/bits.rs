//! Byte/bit conversion. Bits are stored one per `u8` (0 or 1), most
//! significant bit of each byte first.

use crate::error::{Error, Result};

pub fn unpack(bytes: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(bytes.len() * 8);
    for &b in bytes {
        for shift in (0..8).rev() {
            out.push((b >> shift) & 1);
        }
    }
    out
}

/// Pack bits into bytes. The length must be a multiple of 8.
pub fn pack(bits: &[u8]) -> Result<Vec<u8>> {
    if bits.len() % 8 != 0 {
        return Err(Error::LengthMismatch {
            expected: bits.len().next_multiple_of(8),
            actual: bits.len(),
        });
    }
    check(bits)?;
    Ok(bits
        .chunks_exact(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b))
        .collect())
}

/// Reject anything but 0/1 values.
pub fn check(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(i) => Err(Error::Parse(format!("bit {i} has value {}, expected 0 or 1", bits[i]))),
        None => Ok(()),
    }
}
