//! Baseband OFDM link: PSK mapping, IFFT with cyclic prefix, AWGN, FFT and
//! hard-decision demapping. Every subcarrier carries data; there are no
//! pilots, guard bands or equalizer.

mod channel;
mod link;
mod mapping;
mod modem;

pub use channel::{awgn, derive_seed, mean_power, noise_variance, ChannelModel};
pub use link::{
    ber_sweep, ebn0_db_from_snr, qpsk_ber, random_bits, snr_db_from_ebn0, snr_db_from_ebn0_with_cp,
    sweep_with, transmit, transmit_bits, write_constellation_csv, write_samples_csv,
    write_sweep_csv, LinkReport, Transmission,
};
pub use mapping::{demap, map_bits, Mapping};
pub use modem::{ofdm_demodulate, ofdm_modulate, ComplexSample, Modem, OfdmConfig};
