//! Fibonacci Q-matrix powers and 2x2 block diffusion modulo 256.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent whose entries fit in `u128` (F(185) < 2^128).
pub const MAX_EXPONENT: u32 = 184;

/// `Q^n = [[F(n+1), F(n)], [F(n), F(n-1)]]` with exact integer entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QMatrix {
    pub exponent: u32,
    pub entries: [[u128; 2]; 2],
}

/// A 2x2 matrix over Z/256.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Mod256Matrix(pub [[u8; 2]; 2]);

impl Mod256Matrix {
    pub const IDENTITY: Mod256Matrix = Mod256Matrix([[1, 0], [0, 1]]);

    pub fn mul(&self, other: &Mod256Matrix) -> Mod256Matrix {
        let (a, b) = (&self.0, &other.0);
        Mod256Matrix(std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                a[i][0]
                    .wrapping_mul(b[0][j])
                    .wrapping_add(a[i][1].wrapping_mul(b[1][j]))
            })
        }))
    }

    pub fn det(&self) -> u8 {
        let m = &self.0;
        m[0][0]
            .wrapping_mul(m[1][1])
            .wrapping_sub(m[0][1].wrapping_mul(m[1][0]))
    }
}

fn fibonacci(n: u32) -> u128 {
    let (mut a, mut b) = (0u128, 1u128);
    for _ in 0..n {
        let next = a + b;
        a = b;
        b = next;
    }
    a
}

/// Fibonacci Q-matrix raised to an even power `n >= 2`.
pub fn q_power(n: u32) -> Result<QMatrix> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Config(format!(
            "Q-matrix exponent must be even and >= 2, got {n}"
        )));
    }
    if n > MAX_EXPONENT {
        return Err(Error::Config(format!(
            "Q-matrix exponent {n} exceeds supported maximum {MAX_EXPONENT}"
        )));
    }
    let (prev, cur, next) = (fibonacci(n - 1), fibonacci(n), fibonacci(n + 1));
    Ok(QMatrix {
        exponent: n,
        entries: [[next, cur], [cur, prev]],
    })
}

impl QMatrix {
    pub fn reduce_mod256(&self) -> Mod256Matrix {
        Mod256Matrix(self.entries.map(|row| row.map(|v| (v % 256) as u8)))
    }

    /// Inverse modulo 256. For even n, det Q^n = 1 and the inverse is the
    /// adjugate `[[F(n-1), -F(n)], [-F(n), F(n+1)]]`.
    pub fn inverse_mod256(&self) -> Mod256Matrix {
        let m = self.reduce_mod256().0;
        Mod256Matrix([
            [m[1][1], m[0][1].wrapping_neg()],
            [m[1][0].wrapping_neg(), m[0][0]],
        ])
    }

    /// `F(n+1)·F(n-1) - F(n)^2`, or `None` if the products overflow `i128`.
    pub fn cassini(&self) -> Option<i128> {
        let [[next, cur], [_, prev]] = self.entries;
        let lhs = i128::try_from(next).ok()?.checked_mul(i128::try_from(prev).ok()?)?;
        let sq = i128::try_from(cur).ok()?.checked_mul(i128::try_from(cur).ok()?)?;
        Some(lhs - sq)
    }
}

fn check_even(width: usize, height: usize, len: usize) -> Result<()> {
    if width % 2 != 0 || height % 2 != 0 {
        return Err(Error::InvalidImage(format!(
            "diffusion needs even dimensions, got {width}x{height}"
        )));
    }
    if width * height != len {
        return Err(Error::LengthMismatch {
            expected: width * height,
            actual: len,
        });
    }
    Ok(())
}

/// Right-multiply every non-overlapping 2x2 block of a row-major
/// `height x width` matrix by `m`, modulo 256, in place.
pub fn apply_blocks(data: &mut [u8], width: usize, height: usize, m: &Mod256Matrix) -> Result<()> {
    check_even(width, height, data.len())?;
    let q = &m.0;
    for row in (0..height).step_by(2) {
        for col in (0..width).step_by(2) {
            for r in [row, row + 1] {
                let i = r * width + col;
                let (p0, p1) = (data[i], data[i + 1]);
                data[i] = p0.wrapping_mul(q[0][0]).wrapping_add(p1.wrapping_mul(q[1][0]));
                data[i + 1] = p0.wrapping_mul(q[0][1]).wrapping_add(p1.wrapping_mul(q[1][1]));
            }
        }
    }
    Ok(())
}

/// Block diffusion with `Q^n mod 256`.
pub fn diffuse(data: &mut [u8], width: usize, height: usize, q: &QMatrix) -> Result<()> {
    apply_blocks(data, width, height, &q.reduce_mod256())
}

/// Exact inverse of [`diffuse`].
pub fn undiffuse(data: &mut [u8], width: usize, height: usize, q: &QMatrix) -> Result<()> {
    apply_blocks(data, width, height, &q.inverse_mod256())
}
