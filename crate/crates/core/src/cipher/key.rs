use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::StreamLayout;
use crate::error::{Error, Result};

const MAGIC: &str = "chaofdm-key";
const VERSION: u32 = 1;

/// Everything needed to decrypt: per-round initial conditions plus the
/// integration and diffusion settings used to expand them.
///
/// Text form, one item per line:
///
/// ```text
/// chaofdm-key 1
/// rounds 4
/// n0 100000
/// q_exponent 20
/// step 1.0000000000000000e-3
/// size 256 256
/// layout interleaved
/// key x1 x2 x3 x4 x5 x6        (one line per round)
/// ```
///
/// Reals are written with 17 significant digits, which round-trips `f64`
/// exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeyBundle {
    pub width: usize,
    pub height: usize,
    pub n0: usize,
    pub q_exponent: u32,
    pub step: f64,
    pub layout: StreamLayout,
    pub round_keys: Vec<[f64; 6]>,
}

impl KeyBundle {
    pub fn rounds(&self) -> usize {
        self.round_keys.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.round_keys.is_empty() {
            return Err(Error::Config("key bundle holds zero rounds".into()));
        }
        if self.q_exponent < 2 || self.q_exponent % 2 != 0 {
            return Err(Error::Config(format!(
                "q_exponent must be even and >= 2, got {}",
                self.q_exponent
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::Config(format!("invalid integration step {}", self.step)));
        }
        for (i, key) in self.round_keys.iter().enumerate() {
            // x1 may reach exactly 1.0 for an all-white image.
            if !key.iter().all(|v| (0.0..=1.0).contains(v)) {
                return Err(Error::Config(format!(
                    "round {} key has a component outside [0, 1]: {key:?}",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC} {VERSION}");
        let _ = writeln!(s, "rounds {}", self.rounds());
        let _ = writeln!(s, "n0 {}", self.n0);
        let _ = writeln!(s, "q_exponent {}", self.q_exponent);
        let _ = writeln!(s, "step {:.16e}", self.step);
        let _ = writeln!(s, "size {} {}", self.width, self.height);
        let _ = writeln!(s, "layout {}", self.layout.name());
        for key in &self.round_keys {
            s.push_str("key");
            for v in key {
                let _ = write!(s, " {v:.16e}");
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let mut next = |what: &str| -> Result<Vec<&str>> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("key file ends before `{what}`")))?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] != what {
                return Err(Error::Parse(format!("expected `{what}`, found `{line}`")));
            }
            Ok(fields[1..].to_vec())
        };

        let version = single(&next(MAGIC)?, MAGIC)?;
        if version != VERSION.to_string() {
            return Err(Error::Parse(format!("unsupported key file version {version}")));
        }
        let rounds: usize = parse(single(&next("rounds")?, "rounds")?)?;
        let n0 = parse(single(&next("n0")?, "n0")?)?;
        let q_exponent = parse(single(&next("q_exponent")?, "q_exponent")?)?;
        let step = parse(single(&next("step")?, "step")?)?;
        let size = next("size")?;
        if size.len() != 2 {
            return Err(Error::Parse("`size` needs width and height".into()));
        }
        let (width, height) = (parse(size[0])?, parse(size[1])?);
        let layout = StreamLayout::parse(single(&next("layout")?, "layout")?)?;

        let mut round_keys = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let fields = next("key")?;
            if fields.len() != 6 {
                return Err(Error::Parse(format!(
                    "round key needs 6 components, got {}",
                    fields.len()
                )));
            }
            let mut key = [0.0; 6];
            for (slot, f) in key.iter_mut().zip(fields) {
                *slot = parse(f)?;
            }
            round_keys.push(key);
        }
        if let Some(extra) = lines.next() {
            return Err(Error::Parse(format!("unexpected trailing line `{extra}`")));
        }

        let bundle = KeyBundle {
            width,
            height,
            n0,
            q_exponent,
            step,
            layout,
            round_keys,
        };
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}

fn single<'a>(fields: &[&'a str], what: &str) -> Result<&'a str> {
    match fields {
        [one] => Ok(one),
        _ => Err(Error::Parse(format!("`{what}` takes exactly one value"))),
    }
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("cannot parse `{s}`")))
}
