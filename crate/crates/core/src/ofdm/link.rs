use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{awgn, demap, derive_seed, map_bits, ChannelModel, ComplexSample, Mapping, Modem, OfdmConfig};
use crate::error::{Error, Result};
use crate::special::q_function;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub snr_db: f64,
    pub bit_errors: usize,
    pub total_bits: usize,
    pub ber: f64,
    pub psnr_db: Option<f64>,
}

impl LinkReport {
    pub fn new(snr_db: f64, bit_errors: usize, total_bits: usize) -> Self {
        let ber = if total_bits == 0 {
            0.0
        } else {
            bit_errors as f64 / total_bits as f64
        };
        LinkReport {
            snr_db,
            bit_errors,
            total_bits,
            ber,
            psnr_db: None,
        }
    }
}

/// Everything that crossed the channel for one payload.
#[derive(Clone, Debug)]
pub struct Transmission {
    pub report: LinkReport,
    pub received: Vec<u8>,
    /// Zero bits appended to fill the last OFDM symbol.
    pub pad_bits: usize,
    pub tx_samples: Vec<ComplexSample>,
    pub rx_samples: Vec<ComplexSample>,
    /// Received subcarrier symbols, padding included.
    pub rx_symbols: Vec<Complex64>,
}

/// Full chain: map, modulate per block, channel, demodulate, demap.
///
/// The payload is zero-padded to a whole number of OFDM symbols and the
/// padding is dropped again before errors are counted. The channel sees the
/// whole transmitted stream, so its SNR is referred to the mean power of
/// every sample sent, prefixes included.
pub fn transmit(bits: &[u8], cfg: &OfdmConfig, channel: &ChannelModel) -> Result<Transmission> {
    channel.validate()?;
    let modem = Modem::new(cfg)?;
    crate::bits::check(bits)?;
    if bits.is_empty() {
        return Ok(Transmission {
            report: LinkReport::new(channel.snr_db, 0, 0),
            received: Vec::new(),
            pad_bits: 0,
            tx_samples: Vec::new(),
            rx_samples: Vec::new(),
            rx_symbols: Vec::new(),
        });
    }

    let block_bits = cfg.bits_per_ofdm_symbol();
    let padded_len = bits.len().next_multiple_of(block_bits);
    let pad_bits = padded_len - bits.len();
    let mut padded = bits.to_vec();
    padded.resize(padded_len, 0);

    let symbols = map_bits(&padded, cfg.mapping)?;
    let mut tx_samples = Vec::with_capacity(padded_len / block_bits * cfg.frame_len());
    for block in symbols.chunks_exact(cfg.fft_len) {
        tx_samples.extend(modem.modulate(block)?);
    }
    let rx_samples = awgn(&tx_samples, channel)?;

    let mut rx_symbols = Vec::with_capacity(symbols.len());
    for frame in rx_samples.chunks_exact(cfg.frame_len()) {
        rx_symbols.extend(modem.demodulate(frame)?);
    }
    let mut received = demap(&rx_symbols, cfg.mapping);
    received.truncate(bits.len());

    let errors = bits.iter().zip(&received).filter(|(a, b)| a != b).count();
    Ok(Transmission {
        report: LinkReport::new(channel.snr_db, errors, bits.len()),
        received,
        pad_bits,
        tx_samples,
        rx_samples,
        rx_symbols,
    })
}

/// Report and received payload bits for one transmission.
pub fn transmit_bits(
    bits: &[u8],
    cfg: &OfdmConfig,
    channel: &ChannelModel,
) -> Result<(LinkReport, Vec<u8>)> {
    let t = transmit(bits, cfg, channel)?;
    Ok((t.report, t.received))
}

fn check_grid(snr_grid: &[f64]) -> Result<()> {
    if snr_grid.is_empty() {
        return Err(Error::Config("SNR grid is empty".into()));
    }
    if snr_grid.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
        return Err(Error::Config("SNR grid holds an invalid value".into()));
    }
    if snr_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("SNR grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Run [`transmit_bits`] at every grid point, with the channel seed of point
/// `i` derived from `(seed, i)`. Points run in parallel and the reports are
/// returned in grid order.
pub fn ber_sweep(
    bits: &[u8],
    cfg: &OfdmConfig,
    snr_grid: &[f64],
    seed: u64,
) -> Result<Vec<LinkReport>> {
    sweep_with(bits, cfg, snr_grid, seed, |t| Ok(t.report))
}

/// Like [`ber_sweep`] but hands every transmission to `f`, e.g. to decode
/// and score an image payload.
pub fn sweep_with<T, F>(
    bits: &[u8],
    cfg: &OfdmConfig,
    snr_grid: &[f64],
    seed: u64,
    f: F,
) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(Transmission) -> Result<T> + Sync,
{
    check_grid(snr_grid)?;
    cfg.validate()?;
    snr_grid
        .par_iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let channel = ChannelModel::new(snr_db, derive_seed(seed, i as u64));
            f(transmit(bits, cfg, &channel)?)
        })
        .collect()
}

/// Seeded uniform payload for link experiments. It is drawn from a stream
/// that [`ber_sweep`] never uses for noise, so one seed can drive both.
pub fn random_bits(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u64::MAX));
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// Per-sample SNR that yields the given Eb/N0 at each subcarrier.
///
/// The channel SNR is measured per time sample, which equals Es/N0 on every
/// subcarrier after the unscaled FFT. So SNR = Eb/N0 + 10 log10(bits/symbol).
pub fn snr_db_from_ebn0(ebn0_db: f64, mapping: Mapping) -> f64 {
    ebn0_db + 10.0 * (mapping.bits_per_symbol() as f64).log10()
}

pub fn ebn0_db_from_snr(snr_db: f64, mapping: Mapping) -> f64 {
    snr_db - 10.0 * (mapping.bits_per_symbol() as f64).log10()
}

/// As [`snr_db_from_ebn0`] but with Eb counted over all transmitted energy,
/// so the prefix overhead N/(N+cp) is charged to each bit.
pub fn snr_db_from_ebn0_with_cp(ebn0_db: f64, cfg: &OfdmConfig) -> f64 {
    let overhead = cfg.fft_len as f64 / cfg.frame_len() as f64;
    snr_db_from_ebn0(ebn0_db, cfg.mapping) + 10.0 * overhead.log10()
}

/// Bit error rate of Gray QPSK over AWGN, Q(sqrt(2 Eb/N0)).
pub fn qpsk_ber(ebn0_db: f64) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    q_function((2.0 * ebn0).sqrt())
}

pub fn write_sweep_csv<W: Write>(mut w: W, reports: &[LinkReport]) -> Result<()> {
    writeln!(w, "snr_db,total_bits,bit_errors,ber,psnr_db")?;
    for r in reports {
        let psnr = r.psnr_db.map(|p| p.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{:e},{}",
            r.snr_db, r.total_bits, r.bit_errors, r.ber, psnr
        )?;
    }
    Ok(())
}

/// Time-domain dump with `t` in units of the symbol interval.
pub fn write_samples_csv<W: Write>(mut w: W, samples: &[ComplexSample], spacing: f64) -> Result<()> {
    writeln!(w, "t,re,im")?;
    for (i, s) in samples.iter().enumerate() {
        writeln!(w, "{},{:e},{:e}", i as f64 * spacing, s.re, s.im)?;
    }
    Ok(())
}

pub fn write_constellation_csv<W: Write>(mut w: W, points: &[Complex64]) -> Result<()> {
    writeln!(w, "re,im")?;
    for p in points {
        writeln!(w, "{:e},{:e}", p.re, p.im)?;
    }
    Ok(())
}
