use crate::bits;
use crate::cipher::GrayImage;
use crate::error::{Error, Result};

/// Recommended floor on sequence length for every statistical test.
pub const MIN_BITS: usize = 100;

/// A 0/1 sequence under test.
///
/// Sequences built with [`BitSequence::fixture`] skip the recommended
/// minimum lengths of each test and are held only to what the statistic
/// needs to be computable. That is meant for hand-checked short examples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitSequence {
    bits: Vec<u8>,
    relaxed: bool,
}

impl BitSequence {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        bits::check(&bits)?;
        Ok(BitSequence { bits, relaxed: false })
    }

    pub fn fixture(bits: Vec<u8>) -> Result<Self> {
        bits::check(&bits)?;
        Ok(BitSequence { bits, relaxed: true })
    }

    /// Parse a string of '0'/'1' characters, ignoring whitespace.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("unexpected character `{c}` in bit string"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::new(bits)
    }

    /// Bytes unpacked most significant bit first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        BitSequence {
            bits: bits::unpack(bytes),
            relaxed: false,
        }
    }

    pub fn relaxed(mut self) -> Self {
        self.relaxed = true;
        self
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.bits
    }

    /// Error unless the sequence has `recommended` bits, or `structural`
    /// bits for a fixture.
    pub(crate) fn require(
        &self,
        test: &'static str,
        structural: usize,
        recommended: usize,
    ) -> Result<()> {
        let required = if self.relaxed {
            structural
        } else {
            structural.max(recommended).max(MIN_BITS)
        };
        if self.len() < required {
            return Err(Error::SequenceTooShort {
                test,
                required,
                actual: self.len(),
            });
        }
        Ok(())
    }
}

/// Pixels in row-major order, each byte most significant bit first.
pub fn bits_from_image(image: &GrayImage) -> BitSequence {
    BitSequence::from_bytes(image.pixels())
}

pub fn image_from_bits(seq: &BitSequence, width: usize, height: usize) -> Result<GrayImage> {
    let expected = 8 * width * height;
    if seq.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: seq.len(),
        });
    }
    GrayImage::new(width, height, bits::pack(seq.as_slice())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_pixel_image() {
        let img = GrayImage::new(2, 1, vec![0, 255]).unwrap();
        let seq = bits_from_image(&img);
        assert_eq!(seq.as_slice(), &[0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(image_from_bits(&seq, 2, 1).unwrap(), img);
        assert!(image_from_bits(&seq, 1, 1).is_err());
    }

    #[test]
    fn parse_and_guards() {
        let seq = BitSequence::parse("1011 0101 01").unwrap();
        assert_eq!(seq.len(), 10);
        assert_eq!(seq.ones(), 6);
        assert!(BitSequence::parse("10x1").is_err());
        assert!(BitSequence::new(vec![0, 1, 2]).is_err());

        assert!(seq.require("t", 1, 1).is_err(), "strict sequences need 100 bits");
        assert!(seq.clone().relaxed().require("t", 1, 1000).is_ok());
        assert!(seq.relaxed().require("t", 11, 1000).is_err());
    }

    proptest! {
        #[test]
        fn image_roundtrip(w in 1usize..9, h in 1usize..9, seed in any::<u8>()) {
            let img = GrayImage::from_fn(w, h, |r, c| (r as u8).wrapping_mul(31) ^ (c as u8).wrapping_add(seed)).unwrap();
            let seq = bits_from_image(&img);
            prop_assert_eq!(seq.len(), 8 * w * h);
            prop_assert_eq!(image_from_bits(&seq, w, h).unwrap(), img);
        }
    }
}
