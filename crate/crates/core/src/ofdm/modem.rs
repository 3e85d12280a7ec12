use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::Mapping;
use crate::error::{Error, Result};

/// Baseband time-domain sample.
pub type ComplexSample = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    pub fft_len: usize,
    pub cp_len: usize,
    pub mapping: Mapping,
    /// Active symbol interval; samples are spaced `symbol_interval / fft_len`.
    pub symbol_interval: f64,
}

impl Default for OfdmConfig {
    fn default() -> Self {
        OfdmConfig {
            fft_len: 1024,
            cp_len: 256,
            mapping: Mapping::Qpsk,
            symbol_interval: 1.0,
        }
    }
}

impl OfdmConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.fft_len.is_power_of_two() {
            return Err(Error::Config(format!(
                "FFT length must be a power of two, got {}",
                self.fft_len
            )));
        }
        if self.cp_len >= self.fft_len {
            return Err(Error::Config(format!(
                "cyclic prefix ({}) must be shorter than the FFT length ({})",
                self.cp_len, self.fft_len
            )));
        }
        if !(self.symbol_interval.is_finite() && self.symbol_interval > 0.0) {
            return Err(Error::Config(format!(
                "symbol interval must be positive, got {}",
                self.symbol_interval
            )));
        }
        Ok(())
    }

    /// Samples per transmitted OFDM symbol, prefix included.
    pub fn frame_len(&self) -> usize {
        self.fft_len + self.cp_len
    }

    pub fn bits_per_ofdm_symbol(&self) -> usize {
        self.fft_len * self.mapping.bits_per_symbol()
    }

    pub fn sample_spacing(&self) -> f64 {
        self.symbol_interval / self.fft_len as f64
    }
}

/// IFFT/FFT pair planned once for a configuration.
///
/// The inverse transform carries the 1/N factor and the forward transform is
/// unscaled, so `demodulate(modulate(x)) == x`.
#[derive(Clone)]
pub struct Modem {
    cfg: OfdmConfig,
    inverse: Arc<dyn Fft<f64>>,
    forward: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Modem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modem").field("cfg", &self.cfg).finish()
    }
}

impl Modem {
    pub fn new(cfg: &OfdmConfig) -> Result<Self> {
        cfg.validate()?;
        let mut planner = FftPlanner::new();
        Ok(Modem {
            cfg: *cfg,
            inverse: planner.plan_fft_inverse(cfg.fft_len),
            forward: planner.plan_fft_forward(cfg.fft_len),
        })
    }

    pub fn config(&self) -> &OfdmConfig {
        &self.cfg
    }

    /// One block of N subcarrier symbols to N + cp time samples.
    pub fn modulate(&self, symbols: &[Complex64]) -> Result<Vec<ComplexSample>> {
        let (n, cp) = (self.cfg.fft_len, self.cfg.cp_len);
        if symbols.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: symbols.len(),
            });
        }
        let mut body = symbols.to_vec();
        self.inverse.process(&mut body);
        let scale = 1.0 / n as f64;
        let mut out = Vec::with_capacity(n + cp);
        out.extend(body[n - cp..].iter().map(|s| s * scale));
        out.extend(body.iter().map(|s| s * scale));
        Ok(out)
    }

    /// Strip the prefix of one received block and return its N symbols.
    pub fn demodulate(&self, samples: &[ComplexSample]) -> Result<Vec<Complex64>> {
        let frame = self.cfg.frame_len();
        if samples.len() != frame {
            return Err(Error::LengthMismatch {
                expected: frame,
                actual: samples.len(),
            });
        }
        let mut body = samples[self.cfg.cp_len..].to_vec();
        self.forward.process(&mut body);
        Ok(body)
    }
}

pub fn ofdm_modulate(symbols: &[Complex64], cfg: &OfdmConfig) -> Result<Vec<ComplexSample>> {
    Modem::new(cfg)?.modulate(symbols)
}

pub fn ofdm_demodulate(samples: &[ComplexSample], cfg: &OfdmConfig) -> Result<Vec<Complex64>> {
    Modem::new(cfg)?.demodulate(samples)
}
