use serde::{Deserialize, Serialize};

use super::GrayImage;
use crate::error::{Error, Result};
use crate::hyperchaos::{ChaoticState, IntegratorConfig, SystemParams, Trajectory};

/// Mod results below this are replaced by the fallback constant.
const ZERO_THRESHOLD: f64 = 1e-12;
const FALLBACK: f64 = 0.123456789;

/// How the first key component is computed from the pixel sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeyDerivation {
    /// `(ΣP + M·N) / (2^8 · M · N)`, which lies in (0, 1].
    #[default]
    Normalized,
    /// `(ΣP + M^3·N) / 2^(8·(M^2 + N))`. Underflows to zero for anything
    /// larger than a few pixels; kept for comparison only.
    Literal,
}

/// How the x1, x3 and x5 streams are merged into one keystream.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamLayout {
    /// `x1(1), x3(1), x5(1), x1(2), …`
    #[default]
    Interleaved,
    /// `x1(1), x1(2), …, x3(1), …, x5(1), …`
    Concatenated,
}

impl StreamLayout {
    pub fn name(&self) -> &'static str {
        match self {
            StreamLayout::Interleaved => "interleaved",
            StreamLayout::Concatenated => "concatenated",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "interleaved" => Ok(StreamLayout::Interleaved),
            "concatenated" => Ok(StreamLayout::Concatenated),
            other => Err(Error::Unknown {
                kind: "stream layout",
                name: other.to_string(),
            }),
        }
    }
}

fn fractional_with_fallback(x: f64, index: usize) -> f64 {
    let v = (x * 1e6).rem_euclid(1.0);
    if v < ZERO_THRESHOLD {
        FALLBACK * index as f64
    } else {
        v
    }
}

/// Initial condition derived from the image content.
///
/// `x1` comes from the pixel sum (see [`KeyDerivation`]); each following
/// component is `frac(x_{i-1} · 10^6)`, with values below 1e-12 replaced by
/// `0.123456789 · i` so the chain never collapses to zero.
pub fn derive_round_key(image: &GrayImage, derivation: KeyDerivation) -> [f64; 6] {
    let sum: f64 = image.pixels().iter().map(|&p| p as f64).sum();
    let m = image.height() as f64;
    let n = image.width() as f64;
    let x1 = match derivation {
        KeyDerivation::Normalized => (sum + m * n) / (256.0 * m * n),
        KeyDerivation::Literal => {
            let exponent = 8.0 * (m * m + n);
            (sum + m * m * m * n) / exponent.exp2()
        }
    };
    let mut key = [0.0; 6];
    key[0] = x1;
    for i in 1..6 {
        key[i] = fractional_with_fallback(key[i - 1], i + 1);
    }
    key
}

/// Chaotic sequence of `length` reals seeded by `key`.
///
/// Integrates `n0 + ceil(length / 3)` RK4 steps, drops the first `n0`, and
/// reads (x1, x3, x5) from each remaining step in the given layout,
/// truncated to `length`.
pub fn keystream(
    key: &[f64; 6],
    n0: usize,
    length: usize,
    params: &SystemParams,
    cfg: &IntegratorConfig,
    layout: StreamLayout,
) -> Result<Vec<f64>> {
    if length == 0 {
        return Err(Error::Config("keystream length must be >= 1".into()));
    }
    let steps = length.div_ceil(3);
    let mut traj = Trajectory::new(params, ChaoticState(*key), cfg)?;
    traj.skip(n0)?;
    let mut out = Vec::with_capacity(3 * steps);
    match layout {
        StreamLayout::Interleaved => {
            for _ in 0..steps {
                let s = traj.advance()?;
                out.extend([s[0], s[2], s[4]]);
            }
        }
        StreamLayout::Concatenated => {
            let mut streams = [Vec::with_capacity(steps), Vec::with_capacity(steps), Vec::with_capacity(steps)];
            for _ in 0..steps {
                let s = traj.advance()?;
                for (stream, i) in streams.iter_mut().zip([0, 2, 4]) {
                    stream.push(s[i]);
                }
            }
            for stream in streams {
                out.extend(stream);
            }
        }
    }
    out.truncate(length);
    Ok(out)
}

/// A permutation of `0..len`, stored 0-based.
///
/// `source(k)` is the original index of the k-th smallest keystream value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationMap(Vec<usize>);

impl PermutationMap {
    /// Build from 1-based indices, validating that they form a permutation.
    pub fn from_one_based(indices: &[usize]) -> Result<Self> {
        let mut seen = vec![false; indices.len()];
        let mut zero_based = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > indices.len() || seen[i - 1] {
                return Err(Error::Config(format!(
                    "index {i} breaks the permutation of 1..={}",
                    indices.len()
                )));
            }
            seen[i - 1] = true;
            zero_based.push(i - 1);
        }
        Ok(PermutationMap(zero_based))
    }

    pub fn identity(len: usize) -> Self {
        PermutationMap((0..len).collect())
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Stable ascending argsort of `values`; ties keep their original order.
pub fn permutation_from_keystream(values: &[f64]) -> Result<PermutationMap> {
    if values.is_empty() {
        return Err(Error::Config("cannot build a permutation from an empty sequence".into()));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(PermutationMap(order))
}

fn check_len(data_len: usize, perm: &PermutationMap) -> Result<()> {
    if data_len != perm.len() {
        return Err(Error::LengthMismatch {
            expected: perm.len(),
            actual: data_len,
        });
    }
    Ok(())
}

/// `R[i] = P[S[i]]`.
pub fn permute(data: &[u8], perm: &PermutationMap) -> Result<Vec<u8>> {
    check_len(data.len(), perm)?;
    Ok(perm.0.iter().map(|&src| data[src]).collect())
}

/// Inverse of [`permute`].
pub fn unpermute(shuffled: &[u8], perm: &PermutationMap) -> Result<Vec<u8>> {
    check_len(shuffled.len(), perm)?;
    let mut out = vec![0u8; shuffled.len()];
    for (&src, &v) in perm.0.iter().zip(shuffled) {
        out[src] = v;
    }
    Ok(out)
}
