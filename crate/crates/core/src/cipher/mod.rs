//! Multi-round permutation/diffusion image cipher.
//!
//! Each round derives a six-component initial condition from the current
//! image, integrates the hyperchaotic flow to obtain a keystream, shuffles
//! the pixels by the keystream's sort order and diffuses 2x2 blocks with a
//! Fibonacci Q-matrix power. The per-round initial conditions depend on
//! intermediate images, so they are recorded in a [`KeyBundle`] that serves
//! as the secret key for decryption.

mod image;
mod key;
mod keystream;
pub mod qmatrix;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperchaos::{IntegratorConfig, SystemParams};

pub use image::GrayImage;
pub use key::KeyBundle;
pub use keystream::{
    derive_round_key, keystream, permutation_from_keystream, permute, unpermute, KeyDerivation,
    PermutationMap, StreamLayout,
};
pub use qmatrix::{q_power, Mod256Matrix, QMatrix};

pub const DEFAULT_ROUNDS: usize = 4;
pub const DEFAULT_Q_EXPONENT: u32 = 20;
/// Discarded integration steps before the keystream is read. Long enough
/// (t = 100 at the default step) for a 1e-10 key offset to grow to the size
/// of the attractor.
pub const DEFAULT_N0: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CipherConfig {
    pub rounds: usize,
    pub n0: usize,
    pub q_exponent: u32,
    pub integrator: IntegratorConfig,
    pub derivation: KeyDerivation,
    pub layout: StreamLayout,
}

impl Default for CipherConfig {
    fn default() -> Self {
        CipherConfig {
            rounds: DEFAULT_ROUNDS,
            n0: DEFAULT_N0,
            q_exponent: DEFAULT_Q_EXPONENT,
            integrator: IntegratorConfig::default(),
            derivation: KeyDerivation::Normalized,
            layout: StreamLayout::Interleaved,
        }
    }
}

impl CipherConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::Config("cipher needs at least one round".into()));
        }
        self.integrator.validate()?;
        q_power(self.q_exponent)?;
        Ok(())
    }
}

fn round_permutation(
    key: &[f64; 6],
    len: usize,
    n0: usize,
    params: &SystemParams,
    cfg: &IntegratorConfig,
    layout: StreamLayout,
) -> Result<PermutationMap> {
    let stream = keystream(key, n0, len, params, cfg, layout)?;
    permutation_from_keystream(&stream)
}

/// Encrypt `image`, returning the cipher image and the key bundle needed to
/// invert it.
pub fn encrypt(
    image: &GrayImage,
    config: &CipherConfig,
    params: &SystemParams,
) -> Result<(GrayImage, KeyBundle)> {
    config.validate()?;
    params.validate()?;
    image.ensure_cipher_shape()?;
    let (width, height) = (image.width(), image.height());
    let q = q_power(config.q_exponent)?;

    let mut current = image.clone();
    let mut keys = Vec::with_capacity(config.rounds);
    for _ in 0..config.rounds {
        let key = derive_round_key(&current, config.derivation);
        let perm = round_permutation(
            &key,
            current.len(),
            config.n0,
            params,
            &config.integrator,
            config.layout,
        )?;
        let mut shuffled = permute(current.pixels(), &perm)?;
        qmatrix::diffuse(&mut shuffled, width, height, &q)?;
        current = GrayImage::new(width, height, shuffled)?;
        keys.push(key);
    }

    let bundle = KeyBundle {
        width,
        height,
        n0: config.n0,
        q_exponent: config.q_exponent,
        step: config.integrator.step,
        layout: config.layout,
        round_keys: keys,
    };
    Ok((current, bundle))
}

/// Invert [`encrypt`] with the recorded key bundle.
///
/// A wrong key is not detected: it produces a valid image of noise.
pub fn decrypt(cipher: &GrayImage, bundle: &KeyBundle, params: &SystemParams) -> Result<GrayImage> {
    bundle.validate()?;
    params.validate()?;
    if cipher.width() != bundle.width || cipher.height() != bundle.height {
        return Err(Error::InvalidImage(format!(
            "image is {}x{} but key bundle was made for {}x{}",
            cipher.width(),
            cipher.height(),
            bundle.width,
            bundle.height
        )));
    }
    let q = q_power(bundle.q_exponent)?;
    let cfg = IntegratorConfig::new(bundle.step)?;
    let (width, height) = (cipher.width(), cipher.height());

    let mut data = cipher.pixels().to_vec();
    for key in bundle.round_keys.iter().rev() {
        qmatrix::undiffuse(&mut data, width, height, &q)?;
        let perm = round_permutation(key, data.len(), bundle.n0, params, &cfg, bundle.layout)?;
        data = unpermute(&data, &perm)?;
    }
    GrayImage::new(width, height, data)
}
