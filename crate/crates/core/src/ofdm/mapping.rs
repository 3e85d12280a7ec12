use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gray-coded unit-energy PSK constellations.
///
/// QPSK: the first bit of a pair sets the sign of the imaginary part and the
/// second bit the sign of the real part (0 positive, 1 negative), giving
/// 00 -> (+1+j), 01 -> (-1+j), 11 -> (-1-j), 10 -> (+1-j), all over sqrt(2).
///
/// 16-PSK: point `m` sits at angle 2*pi*m/16 and carries the 4-bit label
/// `m ^ (m >> 1)`, most significant bit first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    #[default]
    Qpsk,
    Psk16,
}

fn gray(m: usize) -> usize {
    m ^ (m >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut m = 0;
    while g != 0 {
        m ^= g;
        g >>= 1;
    }
    m
}

impl Mapping {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Mapping::Qpsk => 2,
            Mapping::Psk16 => 4,
        }
    }

    pub fn order(self) -> usize {
        1 << self.bits_per_symbol()
    }

    pub fn name(self) -> &'static str {
        match self {
            Mapping::Qpsk => "qpsk",
            Mapping::Psk16 => "psk16",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Mapping::Qpsk),
            "psk16" | "16psk" | "16-psk" => Ok(Mapping::Psk16),
            _ => Err(Error::Unknown {
                kind: "mapping",
                name: s.into(),
            }),
        }
    }

    /// Constellation point for a bit label (label bits MSB first).
    pub fn point(self, label: usize) -> Complex64 {
        match self {
            Mapping::Qpsk => {
                let im = if label & 2 == 0 { 1.0 } else { -1.0 };
                let re = if label & 1 == 0 { 1.0 } else { -1.0 };
                Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
            }
            Mapping::Psk16 => {
                let m = gray_inverse(label & 15);
                Complex64::from_polar(1.0, 2.0 * PI * m as f64 / 16.0)
            }
        }
    }

    /// All points indexed by label.
    pub fn constellation(self) -> Vec<Complex64> {
        (0..self.order()).map(|l| self.point(l)).collect()
    }

    /// Nearest-point hard decision, returned as a label.
    pub fn decide(self, z: Complex64) -> usize {
        match self {
            // Quadrant decision is exactly minimum distance for QPSK.
            Mapping::Qpsk => (usize::from(z.im < 0.0) << 1) | usize::from(z.re < 0.0),
            Mapping::Psk16 => {
                let sector = (z.arg() * 16.0 / (2.0 * PI)).round() as i64;
                gray(sector.rem_euclid(16) as usize)
            }
        }
    }
}

pub fn map_bits(bits: &[u8], mapping: Mapping) -> Result<Vec<Complex64>> {
    let k = mapping.bits_per_symbol();
    if bits.len() % k != 0 {
        return Err(Error::LengthMismatch {
            expected: bits.len().next_multiple_of(k),
            actual: bits.len(),
        });
    }
    crate::bits::check(bits)?;
    Ok(bits
        .chunks_exact(k)
        .map(|c| mapping.point(c.iter().fold(0, |acc, &b| (acc << 1) | b as usize)))
        .collect())
}

pub fn demap(symbols: &[Complex64], mapping: Mapping) -> Vec<u8> {
    let k = mapping.bits_per_symbol();
    let mut out = Vec::with_capacity(symbols.len() * k);
    for &z in symbols {
        let label = mapping.decide(z);
        for shift in (0..k).rev() {
            out.push(((label >> shift) & 1) as u8);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_force(mapping: Mapping, z: Complex64) -> usize {
        let pts = mapping.constellation();
        (0..pts.len())
            .min_by(|&a, &b| (z - pts[a]).norm().total_cmp(&(z - pts[b]).norm()))
            .unwrap()
    }

    #[test]
    fn qpsk_table() {
        let s = FRAC_1_SQRT_2;
        let syms = map_bits(&[0, 0, 0, 1, 1, 1, 1, 0], Mapping::Qpsk).unwrap();
        let want = [
            Complex64::new(s, s),
            Complex64::new(-s, s),
            Complex64::new(-s, -s),
            Complex64::new(s, -s),
        ];
        for (got, want) in syms.iter().zip(want) {
            assert!((got - want).norm() < 1e-15);
        }
        for pair in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            let sym = map_bits(&pair, Mapping::Qpsk).unwrap();
            assert_eq!(demap(&sym, Mapping::Qpsk), pair);
        }
    }

    #[test]
    fn psk16_gray_neighbours() {
        for m in 0..16usize {
            let a = Mapping::Psk16.point(gray(m));
            let expected = Complex64::from_polar(1.0, 2.0 * PI * m as f64 / 16.0);
            assert!((a - expected).norm() < 1e-12);
            let diff = gray(m) ^ gray((m + 1) % 16);
            assert_eq!(diff.count_ones(), 1, "m={m}");
        }
    }

    #[test]
    fn unit_energy() {
        for mapping in [Mapping::Qpsk, Mapping::Psk16] {
            let pts = mapping.constellation();
            let mean: f64 = pts.iter().map(|p| p.norm_sqr()).sum::<f64>() / pts.len() as f64;
            assert!((mean - 1.0).abs() < 1e-15);
            // labels are a bijection onto the points
            for (l, p) in pts.iter().enumerate() {
                assert_eq!(mapping.decide(*p), l);
            }
        }
    }

    #[test]
    fn indivisible_lengths_rejected() {
        assert!(map_bits(&[1, 0, 1], Mapping::Qpsk).is_err());
        assert!(map_bits(&[1, 0, 1, 0, 1, 1], Mapping::Psk16).is_err());
        assert!(map_bits(&[1, 2], Mapping::Qpsk).is_err());
        assert!(map_bits(&[], Mapping::Qpsk).unwrap().is_empty());
    }

    #[test]
    fn names() {
        for m in [Mapping::Qpsk, Mapping::Psk16] {
            assert_eq!(Mapping::parse(m.name()).unwrap(), m);
        }
        assert!(Mapping::parse("qam64").is_err());
    }

    proptest! {
        #[test]
        fn decisions_are_minimum_distance(re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let z = Complex64::new(re, im);
            for mapping in [Mapping::Qpsk, Mapping::Psk16] {
                let got = mapping.decide(z);
                let best = brute_force(mapping, z);
                let pts = mapping.constellation();
                // ties on a decision boundary may go either way
                prop_assert!(((z - pts[got]).norm() - (z - pts[best]).norm()).abs() < 1e-12);
            }
        }

        #[test]
        fn noiseless_roundtrip(bits in proptest::collection::vec(0u8..2, 0..256)) {
            for mapping in [Mapping::Qpsk, Mapping::Psk16] {
                let k = mapping.bits_per_symbol();
                let trimmed = &bits[..bits.len() / k * k];
                let back = demap(&map_bits(trimmed, mapping).unwrap(), mapping);
                prop_assert_eq!(back.as_slice(), trimmed);
            }
        }
    }
}
