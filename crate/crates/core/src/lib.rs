//! Secure grayscale image transmission over a simulated OFDM link.
//!
//! The crate is organised around four subsystems:
//!
//! - [`hyperchaos`]: a six-dimensional hyperchaotic flow, its RK4 integrator,
//!   Lyapunov spectrum and bifurcation scans.
//! - [`cipher`]: a permutation/diffusion image cipher keyed by trajectories of
//!   that flow, with Fibonacci Q-matrix block diffusion.
//! - [`ofdm`]: PSK mapping, IFFT/FFT modem with cyclic prefix, AWGN channel and
//!   bit-error-rate measurement.
//! - [`randometrics`]: histogram, entropy, PSNR and a subset of the NIST
//!   SP 800-22 statistical test battery.
//!
//! [`pgm`] reads and writes binary PGM images, [`bits`] converts bytes to bit
//! vectors and [`special`] holds the gamma-family functions behind p-values.

pub mod bits;
pub mod cipher;
pub mod error;
pub mod hyperchaos;
pub mod ofdm;
pub mod pgm;
pub mod randometrics;
pub mod special;

pub use cipher::GrayImage;
pub use error::{Error, Result};
