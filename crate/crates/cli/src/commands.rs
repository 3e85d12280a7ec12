use std::io::Write;
use std::path::{Path, PathBuf};

use chaofdm::cipher::{self, KeyBundle};
use chaofdm::hyperchaos::{
    bifurcation_scan, generate_trajectory, lyapunov_spectrum, write_trajectory_csv,
    IntegratorConfig, LyapunovSettings, ScanSettings, SystemParams,
};
use chaofdm::ofdm::{self, ChannelModel, OfdmConfig};
use chaofdm::randometrics::{self, BitSequence, CHI_SQUARE_CRITICAL_255};
use chaofdm::{bits, pgm, GrayImage};
use serde_json::{json, Value};

use crate::args::{
    AnalyzeArgs, DecryptArgs, DynamicsArgs, DynamicsKind, EncryptArgs, SweepArgs, TransmitArgs,
};
use crate::error::{CliError, CliResult};
use crate::manifest::{num, opt_num, OutDir, RunManifest};

/// What a command leaves behind: its manifest and a few lines for stdout.
#[derive(Debug)]
pub struct Outcome {
    pub manifest: PathBuf,
    pub summary: Vec<String>,
}

fn read_image(path: &Path) -> CliResult<GrayImage> {
    pgm::read(path).map_err(|e| CliError::reading(path, e))
}

fn read_key(path: &Path) -> CliResult<KeyBundle> {
    KeyBundle::load(path).map_err(|e| CliError::reading(path, e))
}

fn write_image(out: &mut OutDir, name: &str, image: &GrayImage) -> CliResult<PathBuf> {
    out.write_with(name, |w| Ok(w.write_all(&pgm::encode(image))?))
}

fn system_json(p: &SystemParams) -> Value {
    serde_json::to_value(p).unwrap_or(Value::Null)
}

fn ofdm_json(cfg: &OfdmConfig) -> Value {
    json!({
        "fft_len": cfg.fft_len,
        "cp_len": cfg.cp_len,
        "mapping": cfg.mapping.name(),
        "symbol_interval": cfg.symbol_interval,
    })
}

fn key_json(key: &KeyBundle) -> Value {
    json!({
        "rounds": key.rounds(),
        "n0": key.n0,
        "q_exponent": key.q_exponent,
        "step": key.step,
        "layout": key.layout.name(),
        "width": key.width,
        "height": key.height,
    })
}

fn ensure_key_fits(image: &GrayImage, key: &KeyBundle) -> CliResult<()> {
    if image.width() != key.width || image.height() != key.height {
        return Err(CliError::input(format!(
            "image is {}x{} but the key was made for {}x{}",
            image.width(),
            image.height(),
            key.width,
            key.height
        )));
    }
    Ok(())
}

pub fn encrypt(args: &EncryptArgs, argv: &[String]) -> CliResult<Outcome> {
    let image = read_image(&args.image)?;
    let cfg = args.cipher.resolve()?;
    let params = args.system.resolve()?;
    let (cipher_image, key) = cipher::encrypt(&image, &cfg, &params)?;

    let mut out = OutDir::create(&args.out.out_dir)?;
    let cipher_path = write_image(&mut out, "cipher.pgm", &cipher_image)?;
    let key_path = args.key.clone().unwrap_or_else(|| out.path("key.txt"));
    key.save(&key_path).map_err(|e| CliError::writing(&key_path, e))?;
    out.record(key_path.clone());

    let entropy = randometrics::shannon_entropy(&cipher_image);
    let chi = randometrics::chi_square_uniformity(&randometrics::histogram(&cipher_image));
    let mut manifest = RunManifest::new("encrypt", argv);
    manifest.config = json!({
        "image": args.image,
        "key": key_path,
        "cipher": serde_json::to_value(cfg).unwrap_or(Value::Null),
        "system": system_json(&params),
    });
    manifest.metrics = json!({
        "width": image.width(),
        "height": image.height(),
        "cipher_entropy": entropy,
        "cipher_chi_square": chi.statistic,
    });
    Ok(Outcome {
        manifest: out.finish(manifest)?,
        summary: vec![
            format!("cipher image: {}", cipher_path.display()),
            format!("key: {}", key_path.display()),
            format!("entropy {entropy:.4} bits/pixel, chi-square {:.2}", chi.statistic),
        ],
    })
}

pub fn decrypt(args: &DecryptArgs, argv: &[String]) -> CliResult<Outcome> {
    let image = read_image(&args.image)?;
    let key = read_key(&args.key)?;
    ensure_key_fits(&image, &key)?;
    let params = args.system.resolve()?;
    let plain = cipher::decrypt(&image, &key, &params)?;

    let mut out = OutDir::create(&args.out.out_dir)?;
    let path = write_image(&mut out, "decrypted.pgm", &plain)?;
    let mut manifest = RunManifest::new("decrypt", argv);
    manifest.config = json!({
        "image": args.image,
        "key": args.key,
        "key_settings": key_json(&key),
        "system": system_json(&params),
    });
    Ok(Outcome {
        manifest: out.finish(manifest)?,
        summary: vec![format!("decrypted image: {}", path.display())],
    })
}

pub fn transmit(args: &TransmitArgs, argv: &[String]) -> CliResult<Outcome> {
    let cipher_image = read_image(&args.image)?;
    let key = read_key(&args.key)?;
    ensure_key_fits(&cipher_image, &key)?;
    let params = args.system.resolve()?;
    let cfg = args.ofdm.resolve()?;
    let reference = match &args.reference {
        Some(p) => read_image(p)?,
        None => cipher::decrypt(&cipher_image, &key, &params)?,
    };

    let payload = bits::unpack(cipher_image.pixels());
    let channel_seed = ofdm::derive_seed(args.seed, 0);
    let channel = ChannelModel::new(args.snr, channel_seed);
    let t = ofdm::transmit(&payload, &cfg, &channel)?;

    let received = GrayImage::new(cipher_image.width(), cipher_image.height(), bits::pack(&t.received)?)?;
    let reconstructed = cipher::decrypt(&received, &key, &params)?;
    let psnr = randometrics::psnr(&reference, &reconstructed)
        .map_err(|e| CliError::input(format!("reference image: {e}")))?;
    let mut report = t.report;
    report.psnr_db = Some(psnr);

    let mut out = OutDir::create(&args.out.out_dir)?;
    write_image(&mut out, "received_cipher.pgm", &received)?;
    let recon_path = write_image(&mut out, "reconstructed.pgm", &reconstructed)?;
    out.write_with("link_report.csv", |w| ofdm::write_sweep_csv(w, &[report]))?;
    out.write_with("constellation.csv", |w| {
        ofdm::write_constellation_csv(w, &cfg.mapping.constellation())
    })?;
    let frames = args.dump_symbols.min(t.tx_samples.len() / cfg.frame_len());
    let dump = frames * cfg.frame_len();
    out.write_with("tx_samples.csv", |w| {
        ofdm::write_samples_csv(w, &t.tx_samples[..dump], cfg.sample_spacing())
    })?;
    out.write_with("rx_samples.csv", |w| {
        ofdm::write_samples_csv(w, &t.rx_samples[..dump], cfg.sample_spacing())
    })?;
    out.write_with("rx_constellation.csv", |w| {
        ofdm::write_constellation_csv(w, &t.rx_symbols[..frames * cfg.fft_len])
    })?;

    let byte_exact = reconstructed == reference;
    let mut manifest = RunManifest::new("transmit", argv);
    manifest.config = json!({
        "image": args.image,
        "key": args.key,
        "reference": args.reference,
        "snr_db": num(args.snr),
        "ofdm": ofdm_json(&cfg),
        "key_settings": key_json(&key),
        "system": system_json(&params),
        "dump_symbols": args.dump_symbols,
    });
    manifest.seeds = json!({ "master": args.seed, "channel": channel_seed });
    manifest.metrics = json!({
        "payload_bits": payload.len(),
        "pad_bits": t.pad_bits,
        "bit_errors": report.bit_errors,
        "total_bits": report.total_bits,
        "ber": report.ber,
        "psnr_db": num(psnr),
        "byte_exact": byte_exact,
    });
    Ok(Outcome {
        manifest: out.finish(manifest)?,
        summary: vec![
            format!(
                "SNR {} dB: {} bit errors of {} (BER {:.3e}), PSNR {psnr:.2} dB",
                args.snr, report.bit_errors, report.total_bits, report.ber
            ),
            format!("reconstructed image: {}", recon_path.display()),
        ],
    })
}

pub fn ber_sweep(args: &SweepArgs, argv: &[String]) -> CliResult<Outcome> {
    let cfg = args.ofdm.resolve()?;
    let params = args.system.resolve()?;

    let mut image_info = None;
    let payload = match (&args.image, args.bits) {
        (Some(path), _) => {
            let cipher_image = read_image(path)?;
            let bits = bits::unpack(cipher_image.pixels());
            if let Some(key_path) = &args.key {
                let key = read_key(key_path)?;
                ensure_key_fits(&cipher_image, &key)?;
                let reference = cipher::decrypt(&cipher_image, &key, &params)?;
                image_info = Some((key, reference));
            }
            bits
        }
        (None, Some(n)) => ofdm::random_bits(n, args.seed),
        (None, None) => return Err(CliError::input("either --image or --bits is required")),
    };

    let reports = ofdm::sweep_with(&payload, &cfg, &args.snr_grid, args.seed, |t| {
        let mut report = t.report;
        if let Some((key, reference)) = &image_info {
            let received = GrayImage::new(reference.width(), reference.height(), bits::pack(&t.received)?)?;
            let plain = cipher::decrypt(&received, key, &params)?;
            report.psnr_db = Some(randometrics::psnr(reference, &plain)?);
        }
        Ok(report)
    })?;

    let mut out = OutDir::create(&args.out.out_dir)?;
    let csv = out.write_with("ber_sweep.csv", |w| ofdm::write_sweep_csv(w, &reports))?;

    let point_seeds: Vec<u64> = (0..args.snr_grid.len())
        .map(|i| ofdm::derive_seed(args.seed, i as u64))
        .collect();
    let mut manifest = RunManifest::new("ber-sweep", argv);
    manifest.config = json!({
        "image": args.image,
        "bits": args.bits,
        "key": args.key,
        "snr_grid": args.snr_grid.iter().map(|&v| num(v)).collect::<Vec<_>>(),
        "ofdm": ofdm_json(&cfg),
        "system": system_json(&params),
    });
    manifest.seeds = json!({ "master": args.seed, "points": point_seeds });
    manifest.metrics = Value::Array(
        reports
            .iter()
            .map(|r| {
                json!({
                    "snr_db": num(r.snr_db),
                    "bit_errors": r.bit_errors,
                    "total_bits": r.total_bits,
                    "ber": r.ber,
                    "psnr_db": opt_num(r.psnr_db),
                })
            })
            .collect(),
    );
    let mut summary: Vec<String> = reports
        .iter()
        .map(|r| {
            let psnr = r.psnr_db.map(|p| format!(", PSNR {p:.2} dB")).unwrap_or_default();
            format!("SNR {:>6} dB: BER {:.3e}{psnr}", r.snr_db, r.ber)
        })
        .collect();
    summary.push(format!("sweep: {}", csv.display()));
    Ok(Outcome {
        manifest: out.finish(manifest)?,
        summary,
    })
}

pub fn analyze(args: &AnalyzeArgs, argv: &[String]) -> CliResult<Outcome> {
    let image = read_image(&args.image)?;
    let hist = randometrics::histogram(&image);
    let chi = randometrics::chi_square_uniformity(&hist);
    let entropy = randometrics::histogram_entropy(&hist);
    let seq: BitSequence = randometrics::bits_from_image(&image);
    let suite = randometrics::run_suite(&seq)?;
    let passed = randometrics::suite_passed(&suite);

    let tests: Vec<Value> = suite
        .iter()
        .map(|r| {
            json!({
                "test": r.name,
                "p_value": opt_num(r.p_value),
                "result": r.status.label(),
                "statistic": num(r.statistic),
                "params": r.params.iter().map(|(k, v)| (k.clone(), num(*v))).collect::<serde_json::Map<_, _>>(),
            })
        })
        .collect();
    let metrics = json!({
        "width": image.width(),
        "height": image.height(),
        "entropy": entropy,
        "chi_square": chi.statistic,
        "chi_square_p_value": chi.p_value,
        "chi_square_critical": CHI_SQUARE_CRITICAL_255,
        "chi_square_below_critical": chi.statistic < CHI_SQUARE_CRITICAL_255,
        "nist_passed": passed,
        "nist": tests,
    });

    let mut out = OutDir::create(&args.out.out_dir)?;
    out.write_with("histogram.csv", |w| randometrics::write_histogram_csv(w, &hist))?;
    let nist_path = out.write_with("nist.csv", |w| randometrics::write_suite_csv(w, &suite))?;
    out.write_with("analysis.json", |w| {
        serde_json::to_writer_pretty(&mut *w, &metrics).map_err(std::io::Error::from)?;
        Ok(writeln!(w)?)
    })?;

    let mut manifest = RunManifest::new("analyze", argv);
    manifest.config = json!({ "image": args.image });
    manifest.metrics = metrics;

    let mut summary = vec![format!(
        "entropy {entropy:.4} bits/pixel, chi-square {:.2} (critical {CHI_SQUARE_CRITICAL_255})",
        chi.statistic
    )];
    for r in &suite {
        let p = r.p_value.map(|p| format!("{p:.6}")).unwrap_or_else(|| "-".into());
        summary.push(format!("{:<34} {p:>8}  {}", r.name, r.status.label()));
    }
    summary.push(format!("NIST report: {}", nist_path.display()));
    Ok(Outcome {
        manifest: out.finish(manifest)?,
        summary,
    })
}

pub fn dynamics(args: &DynamicsArgs, argv: &[String]) -> CliResult<Outcome> {
    let params = args.system.resolve()?;
    let init = args.initial_state()?;
    let cfg = IntegratorConfig::new(args.step)?;
    let mut out = OutDir::create(&args.out.out_dir)?;
    let mut manifest = RunManifest::new("dynamics", argv);
    let base = json!({
        "kind": format!("{:?}", args.kind).to_lowercase(),
        "init": init.0,
        "step": args.step,
        "system": system_json(&params),
    });

    let summary = match args.kind {
        DynamicsKind::Lyapunov => {
            let settings = LyapunovSettings {
                transient: args.transient.unwrap_or(10_000),
                total: args.total,
                reorth_interval: args.reorth,
            };
            let report = lyapunov_spectrum(&params, &init, &cfg, &settings)?;
            let path = out.write_with("lyapunov.csv", |w| Ok(report.write_csv(w)?))?;
            manifest.config = json!({ "run": base, "lyapunov": settings });
            manifest.metrics = json!({
                "exponents": report.exponents,
                "sum": report.sum(),
                "divergence": params.divergence(),
                "positive": report.positive_count(),
            });
            let list: Vec<String> = report.exponents.iter().map(|l| format!("{l:.4}")).collect();
            vec![
                format!("exponents: {}", list.join(", ")),
                format!(
                    "sum {:.4} (trace {:.4}), {} positive",
                    report.sum(),
                    params.divergence(),
                    report.positive_count()
                ),
                format!("spectrum: {}", path.display()),
            ]
        }
        DynamicsKind::Bifurcation => {
            let grid = args.grid()?;
            let settings = ScanSettings {
                transient: args.transient.unwrap_or(100_000),
                record: args.record,
                observable: 0,
            };
            let scan = bifurcation_scan(&args.param, &grid, &init, &params, &cfg, &settings)?;
            let path = out.write_with("bifurcation.csv", |w| Ok(scan.write_csv(w)?))?;
            let diverged = scan.diverged.iter().filter(|&&d| d).count();
            manifest.config = json!({
                "run": base,
                "parameter": args.param,
                "grid": grid,
                "scan": settings,
            });
            manifest.metrics = json!({ "points": grid.len(), "diverged": diverged });
            vec![
                format!("{} grid points, {diverged} diverged", grid.len()),
                format!("bifurcation data: {}", path.display()),
            ]
        }
        DynamicsKind::Trajectory => {
            let states = generate_trajectory(&init, &params, &cfg, args.steps)?;
            let path = out.write_with("trajectory.csv", |w| Ok(write_trajectory_csv(w, &states)?))?;
            manifest.config = json!({ "run": base, "steps": args.steps });
            vec![format!("{} states: {}", states.len(), path.display())]
        }
    };
    Ok(Outcome {
        manifest: out.finish(manifest)?,
        summary,
    })
}
