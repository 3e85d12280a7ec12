//! Randomness and image-quality metrics: a ten-test subset of the NIST
//! SP 800-22 battery, histogram uniformity, Shannon entropy and PSNR.

mod image_stats;
pub mod nist;
mod sequence;

pub use image_stats::{
    chi_square_uniformity, histogram, histogram_entropy, mse, psnr, shannon_entropy,
    write_histogram_csv, ChiSquare, Histogram, CHI_SQUARE_CRITICAL_255,
};
pub use nist::{
    nist_test, run_suite, run_suite_with, suite_passed, write_suite_csv, Status, TestKind,
    TestParams, TestResult, ALPHA,
};
pub use sequence::{bits_from_image, image_from_bits, BitSequence, MIN_BITS};
