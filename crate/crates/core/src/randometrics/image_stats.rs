use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cipher::GrayImage;
use crate::error::{Error, Result};
use crate::special::igamc;

/// Upper 1% point of chi-square with 255 degrees of freedom.
pub const CHI_SQUARE_CRITICAL_255: f64 = 310.457;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl Histogram {
    pub fn from_pixels(pixels: &[u8]) -> Self {
        let mut counts = vec![0u64; 256];
        for &p in pixels {
            counts[p as usize] += 1;
        }
        Histogram {
            counts,
            total: pixels.len() as u64,
        }
    }
}

pub fn histogram(image: &GrayImage) -> Histogram {
    Histogram::from_pixels(image.pixels())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Chi-square of the histogram against a uniform 256-bin distribution.
pub fn chi_square_uniformity(h: &Histogram) -> ChiSquare {
    let bins = h.counts.len();
    let expected = h.total as f64 / bins as f64;
    let statistic = if h.total == 0 {
        0.0
    } else {
        h.counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum()
    };
    let dof = bins - 1;
    ChiSquare {
        statistic,
        dof,
        p_value: igamc(dof as f64 / 2.0, statistic / 2.0),
    }
}

/// Shannon entropy of a histogram in bits per symbol.
pub fn histogram_entropy(h: &Histogram) -> f64 {
    if h.total == 0 {
        return 0.0;
    }
    let total = h.total as f64;
    let sum: f64 = h
        .counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            p * p.log2()
        })
        .sum();
    // avoid returning -0.0 for a constant image
    (-sum).max(0.0)
}

pub fn shannon_entropy(image: &GrayImage) -> f64 {
    histogram_entropy(&histogram(image))
}

pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if !a.same_shape(b) {
        return Err(Error::InvalidImage(format!(
            "cannot compare {}x{} with {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    let sum: f64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| (x as f64 - y as f64).powi(2))
        .sum();
    Ok(sum / a.len() as f64)
}

/// Peak signal-to-noise ratio in dB; `f64::INFINITY` for identical images.
pub fn psnr(reference: &GrayImage, reconstructed: &GrayImage) -> Result<f64> {
    let e = mse(reference, reconstructed)?;
    if e == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (255.0f64 * 255.0 / e).log10())
}

pub fn write_histogram_csv<W: Write>(mut w: W, h: &Histogram) -> Result<()> {
    writeln!(w, "value,count")?;
    for (v, c) in h.counts.iter().enumerate() {
        writeln!(w, "{v},{c}")?;
    }
    Ok(())
}
