use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{axpy, ChaoticState, IntegratorConfig, Jacobian, VectorField, DIM};
use crate::error::{Error, Result};

/// Step counts for [`lyapunov_spectrum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LyapunovSettings {
    /// Steps integrated before stretch factors are accumulated.
    pub transient: usize,
    /// Total steps, transient included.
    pub total: usize,
    /// Gram-Schmidt re-orthonormalisation period, in steps.
    pub reorth_interval: usize,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        LyapunovSettings {
            transient: 10_000,
            total: 200_000,
            reorth_interval: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    /// Exponents in descending order, per unit time.
    pub exponents: [f64; DIM],
    pub transient_steps: usize,
    pub total_steps: usize,
}

impl LyapunovReport {
    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }

    pub fn positive_count(&self) -> usize {
        self.exponents.iter().filter(|&&l| l > 0.0).count()
    }

    /// `index,exponent` rows, index starting at 1.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "index,exponent")?;
        for (i, l) in self.exponents.iter().enumerate() {
            writeln!(out, "{},{l}", i + 1)?;
        }
        Ok(())
    }
}

type Frame = [[f64; DIM]; DIM];

// Columns of `frame` are tangent vectors; returns J · frame.
fn propagate(j: &Jacobian, frame: &Frame) -> Frame {
    let mut out = [[0.0; DIM]; DIM];
    for (row, jrow) in j.iter().enumerate() {
        for col in 0..DIM {
            out[row][col] = (0..DIM).map(|k| jrow[k] * frame[k][col]).sum();
        }
    }
    out
}

fn frame_axpy(f: &Frame, h: f64, k: &Frame) -> Frame {
    std::array::from_fn(|r| std::array::from_fn(|c| f[r][c] + h * k[r][c]))
}

/// Modified Gram-Schmidt on the columns of `frame`. Returns column norms
/// before normalisation (the diagonal of R in a QR factorisation).
fn orthonormalize(frame: &mut Frame) -> [f64; DIM] {
    let mut norms = [0.0; DIM];
    for c in 0..DIM {
        for prev in 0..c {
            let dot: f64 = (0..DIM).map(|r| frame[r][c] * frame[r][prev]).sum();
            for r in 0..DIM {
                frame[r][c] -= dot * frame[r][prev];
            }
        }
        let norm = (0..DIM).map(|r| frame[r][c] * frame[r][c]).sum::<f64>().sqrt();
        norms[c] = norm;
        for r in 0..DIM {
            frame[r][c] /= norm;
        }
    }
    norms
}

/// Full Lyapunov spectrum by tangent-space propagation.
///
/// The state and an orthonormal frame of six tangent vectors are advanced
/// together with RK4 (the tangent equation uses the Jacobian at each RK4
/// stage). Every `reorth_interval` steps the frame is re-orthonormalised and,
/// once past the transient, the log stretch factors are accumulated.
pub fn lyapunov_spectrum<F: VectorField + ?Sized>(
    field: &F,
    init: &ChaoticState,
    cfg: &IntegratorConfig,
    settings: &LyapunovSettings,
) -> Result<LyapunovReport> {
    cfg.validate()?;
    let LyapunovSettings {
        transient,
        total,
        reorth_interval,
    } = *settings;
    if reorth_interval == 0 {
        return Err(Error::Config("re-orthonormalisation interval must be >= 1".into()));
    }
    if total <= transient {
        return Err(Error::Config(format!(
            "total steps ({total}) must exceed transient steps ({transient})"
        )));
    }
    if total < 10 * reorth_interval {
        return Err(Error::Config(format!(
            "total steps ({total}) must be at least ten re-orthonormalisation intervals ({})",
            10 * reorth_interval
        )));
    }
    if !init.is_finite() {
        return Err(Error::InvalidState);
    }

    let h = cfg.step;
    let mut x = init.0;
    let mut frame: Frame = std::array::from_fn(|r| std::array::from_fn(|c| (r == c) as u8 as f64));
    let mut log_sums = [0.0; DIM];
    let mut accumulated_steps = 0usize;

    for step in 1..=total {
        let k1 = field.derivative(&x);
        let q1 = propagate(&field.jacobian(&x), &frame);
        let x2 = axpy(&x, 0.5 * h, &k1);
        let f2 = frame_axpy(&frame, 0.5 * h, &q1);
        let k2 = field.derivative(&x2);
        let q2 = propagate(&field.jacobian(&x2), &f2);
        let x3 = axpy(&x, 0.5 * h, &k2);
        let f3 = frame_axpy(&frame, 0.5 * h, &q2);
        let k3 = field.derivative(&x3);
        let q3 = propagate(&field.jacobian(&x3), &f3);
        let x4 = axpy(&x, h, &k3);
        let f4 = frame_axpy(&frame, h, &q3);
        let k4 = field.derivative(&x4);
        let q4 = propagate(&field.jacobian(&x4), &f4);

        for i in 0..DIM {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        for r in 0..DIM {
            for c in 0..DIM {
                frame[r][c] += h / 6.0 * (q1[r][c] + 2.0 * q2[r][c] + 2.0 * q3[r][c] + q4[r][c]);
            }
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step });
        }

        if step % reorth_interval == 0 {
            let norms = orthonormalize(&mut frame);
            if !norms.iter().all(|n| n.is_finite() && *n > 0.0) {
                return Err(Error::Divergence { step });
            }
            if step > transient {
                for (s, n) in log_sums.iter_mut().zip(norms) {
                    *s += n.ln();
                }
                accumulated_steps += reorth_interval;
            }
        }
    }

    if accumulated_steps == 0 {
        return Err(Error::Config(
            "no re-orthonormalisation happened after the transient".into(),
        ));
    }
    let elapsed = accumulated_steps as f64 * h;
    let mut exponents = log_sums.map(|s| s / elapsed);
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(LyapunovReport {
        exponents,
        transient_steps: transient,
        total_steps: total,
    })
}
