//! Binary PGM (P5) with maxval 255.

use std::fs;
use std::path::Path;

use crate::cipher::GrayImage;
use crate::error::{Error, Result};

fn skip_space_and_comments(data: &[u8], pos: &mut usize) {
    while *pos < data.len() {
        match data[*pos] {
            b'#' => {
                while *pos < data.len() && data[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            c if c.is_ascii_whitespace() => *pos += 1,
            _ => break,
        }
    }
}

fn header_number(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
    skip_space_and_comments(data, pos);
    let start = *pos;
    while *pos < data.len() && data[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Parse(format!("PGM header: missing {what}")));
    }
    std::str::from_utf8(&data[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse(format!("PGM header: bad {what}")))
}

pub fn decode(data: &[u8]) -> Result<GrayImage> {
    if !data.starts_with(b"P5") {
        return Err(Error::Parse("not a binary PGM (missing P5 magic)".into()));
    }
    let mut pos = 2;
    let width = header_number(data, &mut pos, "width")?;
    let height = header_number(data, &mut pos, "height")?;
    let maxval = header_number(data, &mut pos, "maxval")?;
    if maxval != 255 {
        return Err(Error::Parse(format!("only 8-bit PGM is supported (maxval {maxval})")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if pos >= data.len() || !data[pos].is_ascii_whitespace() {
        return Err(Error::Parse("PGM header not terminated".into()));
    }
    pos += 1;
    let raster = &data[pos..];
    let expected = width * height;
    if raster.len() < expected {
        return Err(Error::Parse(format!(
            "PGM raster truncated: {} of {expected} bytes",
            raster.len()
        )));
    }
    GrayImage::new(width, height, raster[..expected].to_vec())
}

pub fn encode(image: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend_from_slice(image.pixels());
    out
}

pub fn read(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode(&fs::read(path)?)
}

pub fn write(path: impl AsRef<Path>, image: &GrayImage) -> Result<()> {
    fs::write(path, encode(image))?;
    Ok(())
}
