use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ChaoticState, IntegratorConfig, SystemParams, Trajectory, DIM};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub transient: usize,
    pub record: usize,
    /// State component whose local maxima are recorded (0 = x1).
    pub observable: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            transient: 100_000,
            record: 100_000,
            observable: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub parameter: String,
    pub values: Vec<f64>,
    /// Local maxima of the observable per grid value. Empty when diverged.
    pub maxima: Vec<Vec<f64>>,
    pub diverged: Vec<bool>,
}

impl BifurcationScan {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of maxima at grid point `i` that are more than `tol` apart.
    pub fn distinct_maxima(&self, i: usize, tol: f64) -> usize {
        let mut m = self.maxima[i].clone();
        m.sort_by(f64::total_cmp);
        let mut count = 0;
        let mut last = f64::NEG_INFINITY;
        for v in m {
            if v - last > tol {
                count += 1;
                last = v;
            }
        }
        count
    }

    /// `param_value,xmax` rows; one row per recorded maximum.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "param_value,xmax")?;
        for (v, maxima) in self.values.iter().zip(&self.maxima) {
            for m in maxima {
                writeln!(out, "{v},{m}")?;
            }
        }
        Ok(())
    }
}

fn local_maxima(samples: &[f64]) -> Vec<f64> {
    samples
        .windows(3)
        .filter(|w| w[1] > w[0] && w[1] > w[2])
        .map(|w| w[1])
        .collect()
}

fn scan_point(
    params: &SystemParams,
    init: &ChaoticState,
    cfg: &IntegratorConfig,
    settings: &ScanSettings,
) -> Option<Vec<f64>> {
    let mut traj = Trajectory::new(params, *init, cfg).ok()?;
    traj.skip(settings.transient).ok()?;
    let mut samples = Vec::with_capacity(settings.record);
    for _ in 0..settings.record {
        samples.push(traj.advance().ok()?[settings.observable]);
    }
    Some(local_maxima(&samples))
}

/// Sweep one coefficient over `grid` and record local maxima of the
/// observable after a transient.
///
/// Grid points are independent and run in parallel; a point whose trajectory
/// diverges is flagged rather than aborting the scan.
pub fn bifurcation_scan(
    parameter: &str,
    grid: &[f64],
    init: &ChaoticState,
    params: &SystemParams,
    cfg: &IntegratorConfig,
    settings: &ScanSettings,
) -> Result<BifurcationScan> {
    cfg.validate()?;
    params.get(parameter)?;
    if grid.is_empty() {
        return Err(Error::Config("bifurcation grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("bifurcation grid must be finite and strictly increasing".into()));
    }
    if settings.record == 0 {
        return Err(Error::Config("record count must be >= 1".into()));
    }
    if settings.observable >= DIM {
        return Err(Error::Config(format!("observable index {} out of range", settings.observable)));
    }

    let results: Vec<Option<Vec<f64>>> = grid
        .par_iter()
        .map(|&value| {
            let mut p = *params;
            p.set(parameter, value).expect("name checked above");
            scan_point(&p, init, cfg, settings)
        })
        .collect();

    let diverged = results.iter().map(Option::is_none).collect();
    let maxima = results.into_iter().map(Option::unwrap_or_default).collect();
    Ok(BifurcationScan {
        parameter: parameter.to_string(),
        values: grid.to_vec(),
        maxima,
        diverged,
    })
}
