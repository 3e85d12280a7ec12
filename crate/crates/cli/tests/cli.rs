use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_chaofdm");

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn chaofdm")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn manifest(dir: &Path) -> Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn assert_outputs_exist(dir: &Path) {
    let m = manifest(dir);
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for p in outputs {
        assert!(Path::new(p.as_str().unwrap()).exists(), "missing {p}");
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// A small image keeps the debug-build cipher fast.
fn small_image(dir: &Path) -> PathBuf {
    let path = dir.join("small.pgm");
    let mut bytes = b"P5\n32 16\n255\n".to_vec();
    bytes.extend((0..32 * 16).map(|i| (i * 7 % 256) as u8));
    std::fs::write(&path, bytes).unwrap();
    path
}

fn encrypt_small(tmp: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let plain = small_image(tmp);
    let enc = tmp.join("enc");
    ok(&["encrypt", "--image", s(&plain), "--n0", "2000", "--out-dir", s(&enc)]);
    (plain, enc.join("cipher.pgm"), enc.join("key.txt"))
}

#[test]
fn encrypt_decrypt_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let (plain, cipher, key) = encrypt_small(tmp.path());
    assert_ne!(std::fs::read(&plain).unwrap(), std::fs::read(&cipher).unwrap());
    let dec = tmp.path().join("dec");
    ok(&["decrypt", "--image", s(&cipher), "--key", s(&key), "--out-dir", s(&dec)]);
    assert_eq!(
        std::fs::read(&plain).unwrap(),
        std::fs::read(dec.join("decrypted.pgm")).unwrap()
    );
    assert_outputs_exist(&tmp.path().join("enc"));
    assert_outputs_exist(&dec);
}

#[test]
fn encryption_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, a, _) = encrypt_small(tmp.path());
    let first = std::fs::read(&a).unwrap();
    let (_, b, _) = encrypt_small(tmp.path());
    assert_eq!(first, std::fs::read(&b).unwrap());
}

#[test]
fn odd_width_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("odd.pgm");
    let mut bytes = b"P5\n3 2\n255\n".to_vec();
    bytes.extend([1u8, 2, 3, 4, 5, 6]);
    std::fs::write(&path, bytes).unwrap();
    let out = run(&["encrypt", "--image", s(&path), "--out-dir", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn missing_file_and_bad_flags_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["analyze", "--image", "/no/such/file.pgm", "--out-dir", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["ber-sweep", "--bits", "1000", "--snr-grid", "5,1", "--out-dir", s(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn noiseless_transmit_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let (plain, cipher, key) = encrypt_small(tmp.path());
    let tx = tmp.path().join("tx");
    ok(&[
        "transmit", "--image", s(&cipher), "--key", s(&key), "--snr", "inf",
        "--fft-len", "64", "--cp-len", "16", "--out-dir", s(&tx),
    ]);
    let m = manifest(&tx);
    assert_eq!(m["metrics"]["bit_errors"], 0);
    assert_eq!(m["metrics"]["psnr_db"], "inf");
    assert_eq!(m["metrics"]["byte_exact"], true);
    assert_eq!(
        std::fs::read(&plain).unwrap(),
        std::fs::read(tx.join("reconstructed.pgm")).unwrap()
    );
    assert_outputs_exist(&tx);
}

#[test]
fn noisy_transmit_is_seed_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, cipher, key) = encrypt_small(tmp.path());
    let go = |dir: &str, seed: &str| {
        let d = tmp.path().join(dir);
        ok(&[
            "transmit", "--image", s(&cipher), "--key", s(&key), "--snr", "3",
            "--seed", seed, "--fft-len", "64", "--cp-len", "16", "--out-dir", s(&d),
        ]);
        std::fs::read(d.join("received_cipher.pgm")).unwrap()
    };
    let a = go("a", "7");
    assert_eq!(a, go("b", "7"));
    assert_ne!(a, go("c", "8"));
}

#[test]
fn sweep_writes_one_row_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sw");
    ok(&[
        "ber-sweep", "--bits", "20000", "--snr-grid", "0,6,inf", "--fft-len", "64",
        "--cp-len", "16", "--out-dir", s(&out),
    ]);
    let csv = std::fs::read_to_string(out.join("ber_sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[3].starts_with("inf,20000,0,"));
    assert_outputs_exist(&out);
}

#[test]
fn sweep_with_key_reports_psnr() {
    let tmp = tempfile::tempdir().unwrap();
    let (_, cipher, key) = encrypt_small(tmp.path());
    let out = tmp.path().join("sw");
    ok(&[
        "ber-sweep", "--image", s(&cipher), "--key", s(&key), "--snr-grid", "10,inf",
        "--fft-len", "64", "--cp-len", "16", "--out-dir", s(&out),
    ]);
    let m = manifest(&out);
    assert_eq!(m["metrics"][1]["psnr_db"], "inf");
    assert!(m["metrics"][0]["psnr_db"].is_number());
}

#[test]
fn analyze_reports_ten_tests() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("an");
    ok(&["analyze", "--image", s(&data("camera.pgm")), "--out-dir", s(&out)]);
    let csv = std::fs::read_to_string(out.join("nist.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    let hist = std::fs::read_to_string(out.join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 257);
    let m = manifest(&out);
    // The plaintext photograph is far from uniform.
    assert_eq!(m["metrics"]["chi_square_below_critical"], false);
    assert_outputs_exist(&out);
}

#[test]
fn dynamics_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let ly = tmp.path().join("ly");
    ok(&["dynamics", "lyapunov", "--transient", "100", "--total", "2000", "--out-dir", s(&ly)]);
    assert_eq!(manifest(&ly)["metrics"]["exponents"].as_array().unwrap().len(), 6);

    let bif = tmp.path().join("bif");
    ok(&[
        "dynamics", "bifurcation", "--from", "1", "--to", "1", "--points", "1",
        "--transient", "100", "--record", "500", "--out-dir", s(&bif),
    ]);
    assert_eq!(manifest(&bif)["metrics"]["points"], 1);

    let tr = tmp.path().join("tr");
    ok(&["dynamics", "trajectory", "--steps", "50", "--out-dir", s(&tr)]);
    let csv = std::fs::read_to_string(tr.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
    for d in [&ly, &bif, &tr] {
        assert_outputs_exist(d);
    }
}
