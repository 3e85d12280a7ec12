use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ComplexSample;
use crate::error::{Error, Result};

/// Additive white Gaussian noise channel.
///
/// `snr_db` is the ratio of mean signal power to noise power per complex
/// time-domain sample. `f64::INFINITY` means a noiseless channel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub snr_db: f64,
    pub seed: u64,
}

impl ChannelModel {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        ChannelModel { snr_db, seed }
    }

    pub fn noiseless() -> Self {
        ChannelModel::new(f64::INFINITY, 0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_nan() || self.snr_db == f64::NEG_INFINITY {
            return Err(Error::Config(format!("invalid SNR {} dB", self.snr_db)));
        }
        Ok(())
    }
}

/// Seed for task `index` of a run seeded with `seed`. Each index reads a
/// separate ChaCha stream, so derived seeds do not collide in practice.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng.next_u64()
}

pub fn mean_power(samples: &[ComplexSample]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Noise variance per complex sample for the given signal power.
pub fn noise_variance(signal_power: f64, snr_db: f64) -> f64 {
    signal_power / 10f64.powf(snr_db / 10.0)
}

/// Add complex Gaussian noise whose variance is set from the measured mean
/// power of `samples`, half in each of I and Q.
pub fn awgn(samples: &[ComplexSample], channel: &ChannelModel) -> Result<Vec<ComplexSample>> {
    channel.validate()?;
    if samples.is_empty() {
        return Err(Error::Config("AWGN input is empty".into()));
    }
    if channel.is_noiseless() {
        return Ok(samples.to_vec());
    }
    let power = mean_power(samples);
    if power == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let sigma = (noise_variance(power, channel.snr_db) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(channel.seed);
    Ok(samples
        .iter()
        .map(|s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            s + Complex64::new(sigma * re, sigma * im)
        })
        .collect())
}
