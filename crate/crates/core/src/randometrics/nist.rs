//! Ten tests from the NIST SP 800-22 battery.

use std::f64::consts::SQRT_2;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::BitSequence;
use crate::error::{Error, Result};
use crate::special::{erfc, igamc};

pub const ALPHA: f64 = 0.01;

/// Shortest sequence [`run_suite`] accepts.
pub const SUITE_MIN_BITS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestKind {
    Frequency,
    BlockFrequency,
    Runs,
    LongestRun,
    Dft,
    Rank,
    NonOverlappingTemplate,
    OverlappingTemplate,
    Serial,
    RandomExcursions,
}

impl TestKind {
    /// Report order.
    pub const ALL: [TestKind; 10] = [
        TestKind::Frequency,
        TestKind::BlockFrequency,
        TestKind::Runs,
        TestKind::LongestRun,
        TestKind::Dft,
        TestKind::Rank,
        TestKind::NonOverlappingTemplate,
        TestKind::OverlappingTemplate,
        TestKind::Serial,
        TestKind::RandomExcursions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::Frequency => "Frequency",
            TestKind::BlockFrequency => "Block frequency",
            TestKind::Runs => "Runs",
            TestKind::LongestRun => "Longest-run-of-ones",
            TestKind::Dft => "Discrete Fourier Transform",
            TestKind::Rank => "Binary matrix rank",
            TestKind::NonOverlappingTemplate => "Non overlapping template matching",
            TestKind::OverlappingTemplate => "Overlapping template matching",
            TestKind::Serial => "Serial",
            TestKind::RandomExcursions => "Random excursion",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            TestKind::Frequency => "frequency",
            TestKind::BlockFrequency => "block-frequency",
            TestKind::Runs => "runs",
            TestKind::LongestRun => "longest-run",
            TestKind::Dft => "dft",
            TestKind::Rank => "rank",
            TestKind::NonOverlappingTemplate => "non-overlapping-template",
            TestKind::OverlappingTemplate => "overlapping-template",
            TestKind::Serial => "serial",
            TestKind::RandomExcursions => "random-excursions",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['_', ' '], "-");
        TestKind::ALL
            .into_iter()
            .find(|k| k.slug() == key || k.name().to_ascii_lowercase().replace(' ', "-") == key)
            .ok_or_else(|| Error::Unknown {
                kind: "test",
                name: s.into(),
            })
    }
}

/// Tunable parameters. Defaults follow the SP 800-22 recommendations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestParams {
    pub block_frequency_m: usize,
    pub non_overlapping_template: Vec<u8>,
    pub non_overlapping_blocks: usize,
    pub overlapping_m: usize,
    pub overlapping_block: usize,
    pub overlapping_classes: usize,
    pub serial_m: usize,
}

impl Default for TestParams {
    fn default() -> Self {
        TestParams {
            block_frequency_m: 128,
            non_overlapping_template: vec![0, 0, 0, 0, 0, 0, 0, 0, 1],
            non_overlapping_blocks: 8,
            overlapping_m: 9,
            overlapping_block: 1032,
            overlapping_classes: 5,
            serial_m: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// The test's applicability condition was not met; no p-value exists.
    Inconclusive,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "Random",
            Status::Fail => "Non-random",
            Status::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    pub name: String,
    /// `None` only when the status is inconclusive.
    pub p_value: Option<f64>,
    /// `p_value > ALPHA`.
    pub passed: bool,
    pub status: Status,
    pub statistic: f64,
    pub params: Vec<(String, f64)>,
}

impl TestResult {
    fn decided(kind: TestKind, p_value: f64, statistic: f64, params: Vec<(String, f64)>) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        let passed = p_value > ALPHA;
        TestResult {
            kind,
            name: kind.name().into(),
            p_value: Some(p_value),
            passed,
            status: if passed { Status::Pass } else { Status::Fail },
            statistic,
            params,
        }
    }

    fn inconclusive(kind: TestKind, statistic: f64, params: Vec<(String, f64)>) -> Self {
        TestResult {
            kind,
            name: kind.name().into(),
            p_value: None,
            passed: false,
            status: Status::Inconclusive,
            statistic,
            params,
        }
    }

    /// True when the sequence was judged non-random.
    pub fn rejected(&self) -> bool {
        self.status == Status::Fail
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

fn param(name: &str, value: f64) -> (String, f64) {
    (name.to_string(), value)
}

pub fn nist_test(kind: TestKind, seq: &BitSequence, params: &TestParams) -> Result<TestResult> {
    match kind {
        TestKind::Frequency => frequency(seq),
        TestKind::BlockFrequency => block_frequency(seq, params.block_frequency_m),
        TestKind::Runs => runs(seq),
        TestKind::LongestRun => longest_run(seq),
        TestKind::Dft => dft(seq),
        TestKind::Rank => rank(seq),
        TestKind::NonOverlappingTemplate => non_overlapping_template(
            seq,
            &params.non_overlapping_template,
            params.non_overlapping_blocks,
        ),
        TestKind::OverlappingTemplate => overlapping_template(
            seq,
            params.overlapping_m,
            params.overlapping_block,
            params.overlapping_classes,
        ),
        TestKind::Serial => serial(seq, params.serial_m),
        TestKind::RandomExcursions => random_excursions(seq),
    }
}

/// All ten tests with default parameters, in report order.
pub fn run_suite(seq: &BitSequence) -> Result<Vec<TestResult>> {
    run_suite_with(seq, &TestParams::default())
}

pub fn run_suite_with(seq: &BitSequence, params: &TestParams) -> Result<Vec<TestResult>> {
    if seq.len() < SUITE_MIN_BITS {
        return Err(Error::SequenceTooShort {
            test: "suite",
            required: SUITE_MIN_BITS,
            actual: seq.len(),
        });
    }
    TestKind::ALL
        .par_iter()
        .map(|&k| nist_test(k, seq, params))
        .collect()
}

/// No test in the suite rejected the sequence.
pub fn suite_passed(results: &[TestResult]) -> bool {
    results.iter().all(|r| !r.rejected())
}

pub fn write_suite_csv<W: Write>(mut w: W, results: &[TestResult]) -> Result<()> {
    writeln!(w, "index,test_name,p_value,result")?;
    for (i, r) in results.iter().enumerate() {
        let p = r.p_value.map(|p| format!("{p:.6}")).unwrap_or_default();
        writeln!(w, "{},{},{},{}", i + 1, r.name, p, r.status.label())?;
    }
    Ok(())
}

fn pm1_sum(bits: &[u8]) -> i64 {
    bits.iter().map(|&b| 2 * b as i64 - 1).sum()
}

pub fn frequency(seq: &BitSequence) -> Result<TestResult> {
    let kind = TestKind::Frequency;
    seq.require(kind.name(), 1, 100)?;
    let n = seq.len() as f64;
    let s_obs = pm1_sum(seq.as_slice()).abs() as f64 / n.sqrt();
    let p = erfc(s_obs / SQRT_2);
    Ok(TestResult::decided(kind, p, s_obs, vec![param("n", n)]))
}

pub fn block_frequency(seq: &BitSequence, m: usize) -> Result<TestResult> {
    let kind = TestKind::BlockFrequency;
    if m == 0 {
        return Err(Error::Config("block length must be positive".into()));
    }
    seq.require(kind.name(), m, 100)?;
    let blocks = seq.len() / m;
    let chi2 = 4.0
        * m as f64
        * seq
            .as_slice()
            .chunks_exact(m)
            .map(|b| {
                let pi = b.iter().map(|&x| x as f64).sum::<f64>() / m as f64;
                (pi - 0.5).powi(2)
            })
            .sum::<f64>();
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    Ok(TestResult::decided(
        kind,
        p,
        chi2,
        vec![param("M", m as f64), param("N", blocks as f64)],
    ))
}

pub fn runs(seq: &BitSequence) -> Result<TestResult> {
    let kind = TestKind::Runs;
    seq.require(kind.name(), 2, 100)?;
    let bits = seq.as_slice();
    let n = bits.len() as f64;
    let pi = seq.ones() as f64 / n;
    let tau = 2.0 / n.sqrt();
    let v_obs = 1 + bits.windows(2).filter(|w| w[0] != w[1]).count();
    let params = vec![param("pi", pi), param("tau", tau)];
    // Frequency prerequisite: a biased sequence fails outright.
    if (pi - 0.5).abs() >= tau {
        return Ok(TestResult::decided(kind, 0.0, v_obs as f64, params));
    }
    let expected = 2.0 * n * pi * (1.0 - pi);
    let p = erfc((v_obs as f64 - expected).abs() / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi)));
    Ok(TestResult::decided(kind, p, v_obs as f64, params))
}

struct LongestRunTable {
    m: usize,
    low: usize,
    probs: &'static [f64],
}

const LONGEST_RUN_TABLES: [LongestRunTable; 3] = [
    LongestRunTable {
        m: 8,
        low: 1,
        probs: &[0.2148, 0.3672, 0.2305, 0.1875],
    },
    LongestRunTable {
        m: 128,
        low: 4,
        probs: &[0.1174, 0.2430, 0.2493, 0.1752, 0.1027, 0.1124],
    },
    LongestRunTable {
        m: 10_000,
        low: 10,
        probs: &[0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727],
    },
];

fn longest_ones(block: &[u8]) -> usize {
    let (mut best, mut run) = (0, 0);
    for &b in block {
        if b == 1 {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

pub fn longest_run(seq: &BitSequence) -> Result<TestResult> {
    let kind = TestKind::LongestRun;
    seq.require(kind.name(), 128, 128)?;
    let n = seq.len();
    let table = if n < 6_272 {
        &LONGEST_RUN_TABLES[0]
    } else if n < 750_000 {
        &LONGEST_RUN_TABLES[1]
    } else {
        &LONGEST_RUN_TABLES[2]
    };
    let classes = table.probs.len();
    let mut counts = vec![0usize; classes];
    for block in seq.as_slice().chunks_exact(table.m) {
        let v = longest_ones(block);
        let idx = v.saturating_sub(table.low).min(classes - 1);
        counts[idx] += 1;
    }
    let blocks = (n / table.m) as f64;
    let chi2: f64 = counts
        .iter()
        .zip(table.probs)
        .map(|(&c, &p)| (c as f64 - blocks * p).powi(2) / (blocks * p))
        .sum();
    let p = igamc((classes - 1) as f64 / 2.0, chi2 / 2.0);
    Ok(TestResult::decided(
        kind,
        p,
        chi2,
        vec![param("M", table.m as f64), param("N", blocks)],
    ))
}

pub fn dft(seq: &BitSequence) -> Result<TestResult> {
    let kind = TestKind::Dft;
    seq.require(kind.name(), 2, 1000)?;
    let n = seq.len();
    let mut x: Vec<Complex64> = seq
        .as_slice()
        .iter()
        .map(|&b| Complex64::new(2.0 * b as f64 - 1.0, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut x);
    let nf = n as f64;
    let threshold = ((1.0f64 / 0.05).ln() * nf).sqrt();
    let n0 = 0.95 * nf / 2.0;
    let n1 = x[..n / 2].iter().filter(|v| v.norm() < threshold).count() as f64;
    let d = (n1 - n0) / (nf * 0.95 * 0.05 / 4.0).sqrt();
    let p = erfc(d.abs() / SQRT_2);
    Ok(TestResult::decided(
        kind,
        p,
        d,
        vec![param("T", threshold), param("N0", n0), param("N1", n1)],
    ))
}

/// Rank over GF(2) of a matrix given as row bitmasks.
pub fn gf2_rank(mut rows: Vec<u64>, cols: usize) -> usize {
    let mut rank = 0;
    for col in (0..cols).rev() {
        let bit = 1u64 << col;
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & bit != 0 {
                *row ^= pivot_row;
            }
        }
        rank += 1;
    }
    rank
}

/// Probability that a random M x Q binary matrix has rank `r`.
pub fn rank_probability(r: usize, m: usize, q: usize) -> f64 {
    let exponent = (r * (q + m - r)) as f64 - (m * q) as f64;
    let mut prod = 1.0;
    for i in 0..r {
        let i = i as f64;
        prod *= (1.0 - 2f64.powf(i - q as f64)) * (1.0 - 2f64.powf(i - m as f64))
            / (1.0 - 2f64.powf(i - r as f64));
    }
    2f64.powf(exponent) * prod
}

pub fn rank(seq: &BitSequence) -> Result<TestResult> {
    let kind = TestKind::Rank;
    const SIDE: usize = 32;
    const CELLS: usize = SIDE * SIDE;
    seq.require(kind.name(), CELLS, 38 * CELLS)?;
    let mut counts = [0usize; 3];
    for matrix in seq.as_slice().chunks_exact(CELLS) {
        let rows = matrix
            .chunks_exact(SIDE)
            .map(|row| row.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
            .collect();
        match gf2_rank(rows, SIDE) {
            SIDE => counts[0] += 1,
            r if r == SIDE - 1 => counts[1] += 1,
            _ => counts[2] += 1,
        }
    }
    let full = rank_probability(SIDE, SIDE, SIDE);
    let minus_one = rank_probability(SIDE - 1, SIDE, SIDE);
    let probs = [full, minus_one, 1.0 - full - minus_one];
    let matrices = (seq.len() / CELLS) as f64;
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, p)| (c as f64 - matrices * p).powi(2) / (matrices * p))
        .sum();
    let p = (-chi2 / 2.0).exp();
    Ok(TestResult::decided(
        kind,
        p,
        chi2,
        vec![
            param("N", matrices),
            param("F_M", counts[0] as f64),
            param("F_M-1", counts[1] as f64),
        ],
    ))
}

pub fn non_overlapping_template(
    seq: &BitSequence,
    template: &[u8],
    blocks: usize,
) -> Result<TestResult> {
    let kind = TestKind::NonOverlappingTemplate;
    let m = template.len();
    if m == 0 || blocks == 0 || template.iter().any(|&b| b > 1) {
        return Err(Error::Config("template must be a non-empty bit string and blocks > 0".into()));
    }
    seq.require(kind.name(), blocks * m, 100)?;
    let block_len = seq.len() / blocks;
    let mut chi2 = 0.0;
    let mu = (block_len - m + 1) as f64 / 2f64.powi(m as i32);
    let var = block_len as f64
        * (1.0 / 2f64.powi(m as i32) - (2 * m - 1) as f64 / 2f64.powi(2 * m as i32));
    let mut counts = Vec::with_capacity(blocks);
    for block in seq.as_slice().chunks_exact(block_len).take(blocks) {
        let mut hits = 0usize;
        let mut i = 0;
        while i + m <= block_len {
            if &block[i..i + m] == template {
                hits += 1;
                i += m;
            } else {
                i += 1;
            }
        }
        chi2 += (hits as f64 - mu).powi(2) / var;
        counts.push(hits);
    }
    let p = igamc(blocks as f64 / 2.0, chi2 / 2.0);
    let mut params = vec![
        param("m", m as f64),
        param("N", blocks as f64),
        param("M", block_len as f64),
        param("mu", mu),
        param("sigma2", var),
    ];
    for (j, c) in counts.iter().enumerate() {
        params.push((format!("W{}", j + 1), *c as f64));
    }
    Ok(TestResult::decided(kind, p, chi2, params))
}

/// Probabilities that a random `block`-bit string holds exactly 0, 1, ...,
/// `classes - 1` overlapping occurrences of `m` consecutive ones, with the
/// last entry collecting `classes` or more.
pub fn overlapping_probabilities(m: usize, block: usize, classes: usize) -> Vec<f64> {
    let states = m.max(1);
    // dist[run][count], where run counts trailing ones up to m - 1
    let mut dist = vec![vec![0.0f64; classes + 1]; states];
    dist[0][0] = 1.0;
    for _ in 0..block {
        let mut next = vec![vec![0.0f64; classes + 1]; states];
        for (run, row) in dist.iter().enumerate() {
            for (count, &p) in row.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                next[0][count] += 0.5 * p;
                if run + 1 >= m {
                    next[states - 1][(count + 1).min(classes)] += 0.5 * p;
                } else {
                    next[run + 1][count] += 0.5 * p;
                }
            }
        }
        dist = next;
    }
    (0..=classes)
        .map(|c| dist.iter().map(|row| row[c]).sum())
        .collect()
}

pub fn overlapping_template(
    seq: &BitSequence,
    m: usize,
    block: usize,
    classes: usize,
) -> Result<TestResult> {
    let kind = TestKind::OverlappingTemplate;
    if m == 0 || block < m || classes == 0 {
        return Err(Error::Config(format!(
            "overlapping template needs 0 < m <= block and classes > 0 (m={m}, block={block})"
        )));
    }
    let probs = overlapping_probabilities(m, block, classes);
    // Enough blocks for every expected class count to reach 5.
    let min_p = probs.iter().copied().fold(f64::INFINITY, f64::min);
    let min_blocks = (5.0 / min_p).ceil() as usize;
    seq.require(kind.name(), block, min_blocks * block)?;

    let blocks = seq.len() / block;
    let mut counts = vec![0usize; classes + 1];
    for chunk in seq.as_slice().chunks_exact(block) {
        let (mut run, mut hits) = (0usize, 0usize);
        for &b in chunk {
            if b == 1 {
                run += 1;
                if run >= m {
                    hits += 1;
                }
            } else {
                run = 0;
            }
        }
        counts[hits.min(classes)] += 1;
    }
    let nb = blocks as f64;
    let chi2: f64 = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| (c as f64 - nb * p).powi(2) / (nb * p))
        .sum();
    let p = igamc(classes as f64 / 2.0, chi2 / 2.0);
    let mut params = vec![param("m", m as f64), param("M", block as f64), param("N", nb)];
    for (i, c) in counts.iter().enumerate() {
        params.push((format!("v{i}"), *c as f64));
    }
    Ok(TestResult::decided(kind, p, chi2, params))
}

// psi^2 statistic over overlapping m-bit patterns with wraparound.
fn psi_squared(bits: &[u8], m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let n = bits.len();
    let mask = (1usize << m) - 1;
    let mut counts = vec![0u64; 1 << m];
    let mut pattern = 0usize;
    for &b in &bits[..m - 1] {
        pattern = (pattern << 1) | b as usize;
    }
    for i in 0..n {
        pattern = ((pattern << 1) | bits[(i + m - 1) % n] as usize) & mask;
        counts[pattern] += 1;
    }
    let sum_sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
    sum_sq * (1u64 << m) as f64 / n as f64 - n as f64
}

pub fn serial(seq: &BitSequence, m: usize) -> Result<TestResult> {
    let kind = TestKind::Serial;
    if !(2..=24).contains(&m) {
        return Err(Error::Config(format!("serial block length must be 2..=24, got {m}")));
    }
    // Requires m < floor(log2 n) - 2.
    seq.require(kind.name(), m + 1, 1usize << (m + 3))?;
    let bits = seq.as_slice();
    let psi_m = psi_squared(bits, m);
    let psi_m1 = psi_squared(bits, m - 1);
    let psi_m2 = psi_squared(bits, m - 2);
    let del1 = psi_m - psi_m1;
    let del2 = psi_m - 2.0 * psi_m1 + psi_m2;
    let p1 = igamc(2f64.powi(m as i32 - 2), del1 / 2.0);
    let p2 = igamc(2f64.powi(m as i32 - 3), del2 / 2.0);
    Ok(TestResult::decided(
        kind,
        p1.min(p2),
        del1,
        vec![
            param("m", m as f64),
            param("p1", p1),
            param("p2", p2),
            param("del_psi2", del1),
            param("del2_psi2", del2),
        ],
    ))
}

pub const EXCURSION_STATES: [i64; 8] = [-4, -3, -2, -1, 1, 2, 3, 4];

fn excursion_probabilities(x: i64) -> [f64; 6] {
    let ax = x.unsigned_abs() as f64;
    let stay = 1.0 - 1.0 / (2.0 * ax);
    let mut pi = [0.0; 6];
    pi[0] = stay;
    for (k, slot) in pi.iter_mut().enumerate().take(5).skip(1) {
        *slot = 1.0 / (4.0 * ax * ax) * stay.powi(k as i32 - 1);
    }
    pi[5] = 1.0 / (2.0 * ax) * stay.powi(4);
    pi
}

/// Minimum cycle count for the excursion statistics to be applicable.
pub fn excursion_min_cycles(n: usize) -> usize {
    ((0.005 * (n as f64).sqrt()).ceil() as usize).max(500)
}

pub fn random_excursions(seq: &BitSequence) -> Result<TestResult> {
    let kind = TestKind::RandomExcursions;
    seq.require(kind.name(), 1, 100)?;
    // nu[state][k]: cycles visiting the state exactly k times (k >= 5 pooled)
    let mut nu = [[0usize; 6]; 8];
    let mut visits = [0usize; 8];
    let mut cycles = 0usize;
    let mut s = 0i64;
    let close = |visits: &mut [usize; 8], nu: &mut [[usize; 6]; 8]| {
        for (v, row) in visits.iter_mut().zip(nu.iter_mut()) {
            row[(*v).min(5)] += 1;
            *v = 0;
        }
    };
    for &b in seq.as_slice() {
        s += 2 * b as i64 - 1;
        if s == 0 {
            cycles += 1;
            close(&mut visits, &mut nu);
        } else if (-4..=4).contains(&s) {
            let idx = if s < 0 { (s + 4) as usize } else { (s + 3) as usize };
            visits[idx] += 1;
        }
    }
    if s != 0 {
        cycles += 1;
        close(&mut visits, &mut nu);
    }

    let j = cycles as f64;
    let needed = excursion_min_cycles(seq.len());
    let mut params = vec![param("J", j)];
    if cycles < needed {
        params.push(param("J_min", needed as f64));
        return Ok(TestResult::inconclusive(kind, j, params));
    }
    let mut worst = (f64::INFINITY, 0.0);
    for (state, counts) in EXCURSION_STATES.iter().zip(&nu) {
        let pi = excursion_probabilities(*state);
        let chi2: f64 = counts
            .iter()
            .zip(pi)
            .map(|(&c, p)| (c as f64 - j * p).powi(2) / (j * p))
            .sum();
        let p = igamc(2.5, chi2 / 2.0);
        params.push((format!("p(x={state})"), p));
        if p < worst.0 {
            worst = (p, chi2);
        }
    }
    Ok(TestResult::decided(kind, worst.0, worst.1, params))
}
