use std::path::PathBuf;

use chaofdm::cipher::{CipherConfig, DEFAULT_N0, DEFAULT_Q_EXPONENT, DEFAULT_ROUNDS};
use chaofdm::hyperchaos::{ChaoticState, Form, IntegratorConfig, SystemParams};
use chaofdm::ofdm::{Mapping, OfdmConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

/// Hyperchaotic image cipher over a simulated OFDM link.
///
/// Exit codes: 0 success, 1 computation or output failure, 2 invalid
/// arguments or input files.
#[derive(Debug, Parser)]
#[command(name = "chaofdm", version, about, long_about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encrypt a PGM image and write the cipher image and key file.
    Encrypt(EncryptArgs),
    /// Decrypt a cipher image with its key file.
    Decrypt(DecryptArgs),
    /// Send a cipher image over the OFDM link, then decrypt what arrives.
    Transmit(TransmitArgs),
    /// Bit error rate (and reconstruction PSNR) over a grid of SNR values.
    BerSweep(SweepArgs),
    /// Histogram, entropy, chi-square and the NIST test subset for an image.
    Analyze(AnalyzeArgs),
    /// Lyapunov spectrum, bifurcation scan or raw trajectory of the flow.
    Dynamics(DynamicsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for every file the command writes.
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Override a flow coefficient, e.g. `--set r=2.5`. Repeatable.
    #[arg(long = "set", value_name = "NAME=VALUE")]
    pub overrides: Vec<String>,
    /// Controller coupling of the flow.
    #[arg(long, value_enum, default_value_t = FormArg::Bounded)]
    pub form: FormArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    Bounded,
    Divergent,
}

impl SystemArgs {
    pub fn resolve(&self) -> CliResult<SystemParams> {
        let form = match self.form {
            FormArg::Bounded => Form::Bounded,
            FormArg::Divergent => Form::Divergent,
        };
        let mut p = SystemParams::default().with_form(form);
        for item in &self.overrides {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("--set expects NAME=VALUE, got `{item}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| CliError::input(format!("--set {name}: `{value}` is not a number")))?;
            p.set(name.trim(), value)?;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CipherArgs {
    /// Permutation/diffusion rounds.
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    pub rounds: usize,
    /// Integration steps discarded before the keystream is read.
    #[arg(long, default_value_t = DEFAULT_N0)]
    pub n0: usize,
    /// Exponent of the Fibonacci Q-matrix used for diffusion (even).
    #[arg(long = "q-exp", default_value_t = DEFAULT_Q_EXPONENT)]
    pub q_exp: u32,
    /// RK4 step size.
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
}

impl CipherArgs {
    pub fn resolve(&self) -> CliResult<CipherConfig> {
        let cfg = CipherConfig {
            rounds: self.rounds,
            n0: self.n0,
            q_exponent: self.q_exp,
            integrator: IntegratorConfig::new(self.step)?,
            ..CipherConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Args)]
pub struct OfdmArgs {
    #[arg(long = "fft-len", default_value_t = 1024)]
    pub fft_len: usize,
    #[arg(long = "cp-len", default_value_t = 256)]
    pub cp_len: usize,
    #[arg(long, value_enum, default_value_t = MappingArg::Qpsk)]
    pub mapping: MappingArg,
    /// Active OFDM symbol interval, used for sample time stamps.
    #[arg(long = "symbol-interval", default_value_t = 1.0)]
    pub symbol_interval: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MappingArg {
    Qpsk,
    Psk16,
}

impl OfdmArgs {
    pub fn resolve(&self) -> CliResult<OfdmConfig> {
        let cfg = OfdmConfig {
            fft_len: self.fft_len,
            cp_len: self.cp_len,
            mapping: match self.mapping {
                MappingArg::Qpsk => Mapping::Qpsk,
                MappingArg::Psk16 => Mapping::Psk16,
            },
            symbol_interval: self.symbol_interval,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parse an SNR in dB. `inf` and `noiseless` select the noiseless channel.
pub fn parse_snr(s: &str) -> Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if t == "inf" || t == "+inf" || t == "noiseless" {
        return Ok(f64::INFINITY);
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not an SNR in dB (or `inf`)")),
    }
}

#[derive(Debug, Clone, Args)]
pub struct EncryptArgs {
    /// Plain 8-bit PGM (P5) image with even width and height.
    #[arg(long)]
    pub image: PathBuf,
    /// Where to write the key file (default: <out-dir>/key.txt).
    #[arg(long)]
    pub key: Option<PathBuf>,
    #[command(flatten)]
    pub cipher: CipherArgs,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DecryptArgs {
    /// Cipher image.
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub key: PathBuf,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TransmitArgs {
    /// Cipher image to send.
    #[arg(long)]
    pub image: PathBuf,
    /// Key of the cipher image, used to decrypt at the receiver.
    #[arg(long)]
    pub key: PathBuf,
    /// Per-sample SNR in dB, or `inf` for a noiseless channel.
    #[arg(long, value_parser = parse_snr, default_value = "20")]
    pub snr: f64,
    /// Master seed for channel noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Plain image to score the reconstruction against (default: the
    /// decryption of the cipher image before transmission).
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// OFDM symbols included in the sample and constellation dumps.
    #[arg(long = "dump-symbols", default_value_t = 1)]
    pub dump_symbols: usize,
    #[command(flatten)]
    pub ofdm: OfdmArgs,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Cipher image to send. Either this or `--bits` is required.
    #[arg(long, conflicts_with = "bits", required_unless_present = "bits")]
    pub image: Option<PathBuf>,
    /// Send this many seeded random bits instead of an image.
    #[arg(long)]
    pub bits: Option<usize>,
    /// Key of the cipher image; enables the PSNR column.
    #[arg(long, requires = "image")]
    pub key: Option<PathBuf>,
    /// Strictly increasing SNR values in dB, comma separated.
    #[arg(long = "snr-grid", value_delimiter = ',', value_parser = parse_snr, required = true)]
    pub snr_grid: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub ofdm: OfdmArgs,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DynamicsKind {
    Lyapunov,
    Bifurcation,
    Trajectory,
}

#[derive(Debug, Clone, Args)]
pub struct DynamicsArgs {
    #[arg(value_enum)]
    pub kind: DynamicsKind,
    /// Initial state, six comma-separated values.
    #[arg(long, value_delimiter = ',', num_args = 1, default_value = "1,1,1,1,1,1")]
    pub init: Vec<f64>,
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
    /// Steps before exponents or maxima are recorded.
    #[arg(long)]
    pub transient: Option<usize>,
    /// Lyapunov: total steps including the transient.
    #[arg(long, default_value_t = 200_000)]
    pub total: usize,
    /// Lyapunov: steps between re-orthonormalisations.
    #[arg(long, default_value_t = 10)]
    pub reorth: usize,
    /// Bifurcation: coefficient to sweep.
    #[arg(long, default_value = "r")]
    pub param: String,
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    #[arg(long, default_value_t = 10.0)]
    pub to: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Bifurcation: steps recorded after the transient.
    #[arg(long, default_value_t = 100_000)]
    pub record: usize,
    /// Trajectory: number of steps written.
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

impl DynamicsArgs {
    pub fn initial_state(&self) -> CliResult<ChaoticState> {
        let values: [f64; 6] = self
            .init
            .as_slice()
            .try_into()
            .map_err(|_| CliError::input(format!("--init needs 6 values, got {}", self.init.len())))?;
        let state = ChaoticState::new(values);
        if !state.is_finite() {
            return Err(CliError::input("--init values must be finite"));
        }
        Ok(state)
    }

    /// Evenly spaced bifurcation grid, `points` values from `from` to `to`.
    pub fn grid(&self) -> CliResult<Vec<f64>> {
        if self.points == 0 {
            return Err(CliError::input("--points must be at least 1"));
        }
        if self.points == 1 {
            return Ok(vec![self.from]);
        }
        if !(self.to > self.from) {
            return Err(CliError::input("--to must exceed --from"));
        }
        let span = self.to - self.from;
        Ok((0..self.points)
            .map(|i| self.from + span * i as f64 / (self.points - 1) as f64)
            .collect())
    }
}
