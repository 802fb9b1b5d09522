//! Gated threshold detectors: exact click probabilities, seeded Monte-Carlo
//! counting with parallel workers, accidental estimation, and fringe fitting.
//!
//! Uniform losses (switch insertion, preparation discards, fibers) commute
//! with passive linear optics, so they are folded into a per-port
//! [`LossBudget`] consumed at detection time instead of being applied to
//! amplitudes.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::fock::{Port, PureState};
use crate::{Error, Result};

/// Amplitude-squared transmission per port, accumulated from insertion
/// losses and preparation discards. Missing ports transmit fully.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossBudget {
    factors: BTreeMap<Port, f64>,
}

impl LossBudget {
    /// Unit transmission everywhere.
    pub fn transparent() -> Self {
        LossBudget::default()
    }

    pub fn transmission(&self, port: Port) -> f64 {
        self.factors.get(&port).copied().unwrap_or(1.0)
    }

    /// Multiply the port's transmission by a power factor in (0, 1].
    pub fn apply_factor(&mut self, port: Port, factor: f64) {
        assert!(factor > 0.0 && factor <= 1.0, "loss factor must be in (0, 1]");
        let entry = self.factors.entry(port).or_insert(1.0);
        *entry *= factor;
    }

    /// Multiply the port's transmission by 10^(-db/10).
    pub fn apply_db(&mut self, port: Port, db: f64) {
        self.apply_factor(port, 10f64.powf(-db / 10.0));
    }
}

/// One gated threshold detector: it clicks when at least one photon at
/// (port, gate_bin) survives the loss budget and its efficiency, or on a
/// dark count.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorConfig {
    pub port: Port,
    pub gate_bin: u8,
    pub efficiency: f64,
    pub dark_prob: f64,
}

impl DetectorConfig {
    pub fn new(port: Port, gate_bin: u8) -> Self {
        DetectorConfig {
            port,
            gate_bin,
            efficiency: 0.08,
            dark_prob: 2e-6,
        }
    }

    pub fn ideal(port: Port, gate_bin: u8) -> Self {
        DetectorConfig {
            port,
            gate_bin,
            efficiency: 1.0,
            dark_prob: 0.0,
        }
    }
}

/// Counts accumulated over a Monte-Carlo run. The accidental estimate is the
/// singles product per start pulse.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CountRecord {
    pub starts: u64,
    pub singles_c: u64,
    pub singles_d: u64,
    pub coincidences: u64,
    pub accidentals_estimate: f64,
}

impl CountRecord {
    pub fn rate(&self) -> f64 {
        self.coincidences as f64 / self.starts as f64
    }

    /// Binomial standard error of the coincidence rate.
    pub fn rate_stderr(&self) -> f64 {
        let n = self.starts as f64;
        let p = self.coincidences as f64 / n;
        (p * (1.0 - p) / n).sqrt()
    }

    fn absorb(&mut self, other: &CountRecord) {
        self.starts += other.starts;
        self.singles_c += other.singles_c;
        self.singles_d += other.singles_d;
        self.coincidences += other.coincidences;
    }
}

/// Uncorrelated-coincidence estimate: singles_c * singles_d / starts.
pub fn estimate_accidentals(record: &CountRecord) -> Result<f64> {
    if record.starts == 0 {
        return Err(Error::ZeroStarts);
    }
    Ok(record.singles_c as f64 * record.singles_d as f64 / record.starts as f64)
}

/// Coincidences with the accidental estimate subtracted, floored at zero.
pub fn subtracted_coincidences(record: &CountRecord) -> Result<f64> {
    let acc = estimate_accidentals(record)?;
    Ok((record.coincidences as f64 - acc).max(0.0))
}

/// Exact joint click/no-click distribution over a set of detectors,
/// indexed by bitmask (bit i set = detector i clicked).
#[derive(Clone, Debug)]
pub struct ClickDistribution {
    detectors: usize,
    probs: Vec<f64>,
}

impl ClickDistribution {
    pub fn pattern(&self, mask: usize) -> f64 {
        self.probs[mask]
    }

    /// P(detector i clicks), any state of the others.
    pub fn marginal(&self, i: usize) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(mask, _)| mask & (1 << i) != 0)
            .map(|(_, p)| p)
            .sum()
    }

    /// P(all detectors click).
    pub fn coincidence(&self) -> f64 {
        self.probs[(1 << self.detectors) - 1]
    }
}

/// One sampled optical outcome collapsed to what the detectors can see:
/// its probability and the per-detector click probability given that outcome.
#[derive(Clone, Debug)]
struct OutcomeCell {
    prob: f64,
    click: Vec<f64>,
}

/// Collapse the state to detector-visible outcome cells. Cross terms between
/// occupation vectors never interfere here: measurement is diagonal in the
/// occupation basis per gate bin. Subnormalized remainder (truncated tail,
/// discarded interferometer paths) is an explicit no-photon outcome.
fn outcome_cells_with_counts(
    state: &PureState,
    detectors: &[DetectorConfig],
    budget: &LossBudget,
) -> Vec<(OutcomeCell, Vec<u32>)> {
    let survival: Vec<f64> = detectors
        .iter()
        .map(|d| (budget.transmission(d.port) * d.efficiency).clamp(0.0, 1.0))
        .collect();
    let mut by_counts: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    let mut total = 0.0;
    for (occ, amp) in state.terms() {
        let counts: Vec<u32> = detectors
            .iter()
            .map(|d| occ.at_gate(d.port, d.gate_bin))
            .collect();
        let p = amp.norm_sqr();
        total += p;
        *by_counts.entry(counts).or_insert(0.0) += p;
    }
    let remainder = (1.0 - total).max(0.0);
    if remainder > 0.0 {
        *by_counts.entry(vec![0; detectors.len()]).or_insert(0.0) += remainder;
    }
    by_counts
        .into_iter()
        .map(|(counts, prob)| {
            let click = detectors
                .iter()
                .zip(&survival)
                .zip(&counts)
                .map(|((d, &s), &n)| 1.0 - (1.0 - d.dark_prob) * (1.0 - s).powi(n as i32))
                .collect();
            (OutcomeCell { prob, click }, counts)
        })
        .collect()
}

/// Weighted incoherent mixture of pure states; weights sum to 1. Pipelines
/// produce two-component mixtures when the switch extinction bias is active.
pub type StateMixture = Vec<(f64, PureState)>;

fn mixture_cells(
    mixture: &[(f64, PureState)],
    detectors: &[DetectorConfig],
    budget: &LossBudget,
) -> Vec<OutcomeCell> {
    // Components with the same detector-visible counts share click
    // probabilities, so their cells merge.
    let mut merged: BTreeMap<Vec<u32>, (f64, Vec<f64>)> = BTreeMap::new();
    for (weight, state) in mixture {
        for (cell, counts) in outcome_cells_with_counts(state, detectors, budget) {
            let entry = merged.entry(counts).or_insert((0.0, cell.click.clone()));
            entry.0 += weight * cell.prob;
        }
    }
    merged
        .into_values()
        .map(|(prob, click)| OutcomeCell { prob, click })
        .collect()
}

/// Exact joint click distribution for the final optical state.
pub fn click_probabilities(
    state: &PureState,
    detectors: &[DetectorConfig],
    budget: &LossBudget,
) -> ClickDistribution {
    click_probabilities_mixed(&[(1.0, state.clone())], detectors, budget)
}

/// [`click_probabilities`] over an incoherent mixture.
pub fn click_probabilities_mixed(
    mixture: &[(f64, PureState)],
    detectors: &[DetectorConfig],
    budget: &LossBudget,
) -> ClickDistribution {
    let cells = mixture_cells(mixture, detectors, budget);
    let d = detectors.len();
    let mut probs = vec![0.0; 1 << d];
    for cell in &cells {
        for mask in 0..(1 << d) {
            let mut p = cell.prob;
            for (i, &c) in cell.click.iter().enumerate() {
                p *= if mask & (1 << i) != 0 { c } else { 1.0 - c };
            }
            probs[mask] += p;
        }
    }
    ClickDistribution { detectors: d, probs }
}

/// Stream-derived seed for scan points and similar sub-runs.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    // splitmix64 step over master xor a spread of the index
    let mut z = master ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sample `pulses` source pulses and count singles and coincidences for two
/// detectors (C-side first, D-side second).
///
/// Pulses are split into one batch per worker; batch w draws from an
/// independent ChaCha stream (master seed, stream w), so results are bitwise
/// reproducible for a fixed (seed, workers) and statistically identical
/// across worker counts. With the `parallel` feature the batches run on
/// rayon; otherwise the same batches run sequentially with identical output.
pub fn run_monte_carlo(
    state: &PureState,
    detectors: &[DetectorConfig; 2],
    budget: &LossBudget,
    pulses: u64,
    seed: u64,
    workers: usize,
) -> CountRecord {
    run_monte_carlo_mixed(&[(1.0, state.clone())], detectors, budget, pulses, seed, workers)
}

/// [`run_monte_carlo`] over an incoherent mixture.
pub fn run_monte_carlo_mixed(
    mixture: &[(f64, PureState)],
    detectors: &[DetectorConfig; 2],
    budget: &LossBudget,
    pulses: u64,
    seed: u64,
    workers: usize,
) -> CountRecord {
    assert!(pulses >= 1, "need at least one pulse");
    let workers = workers.max(1) as u64;
    let mut cells = mixture_cells(mixture, detectors, budget);
    // Most pulses land in the heaviest cell; scan it first. The merge above
    // produced a deterministic cell list, and this sort is total.
    cells.sort_by(|a, b| b.prob.total_cmp(&a.prob));
    // Cumulative distribution over outcome cells.
    let mut table: Vec<(f64, [f64; 2])> = Vec::with_capacity(cells.len());
    let mut cum = 0.0;
    for cell in &cells {
        cum += cell.prob;
        table.push((cum, [cell.click[0], cell.click[1]]));
    }
    if let Some(last) = table.last_mut() {
        last.0 = f64::MAX; // guard against rounding at the top end
    }

    let batches: Vec<(u64, u64)> = (0..workers)
        .map(|w| {
            let n = pulses / workers + u64::from(w < pulses % workers);
            (w, n)
        })
        .collect();

    let run_batch = |&(stream, n): &(u64, u64)| -> CountRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut rec = CountRecord {
            starts: n,
            ..CountRecord::default()
        };
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut click = [0.0f64; 2];
            for &(edge, probs) in &table {
                if u < edge {
                    click = probs;
                    break;
                }
            }
            let c: bool = rng.random::<f64>() < click[0];
            let d: bool = rng.random::<f64>() < click[1];
            rec.singles_c += u64::from(c);
            rec.singles_d += u64::from(d);
            rec.coincidences += u64::from(c && d);
        }
        rec
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<CountRecord> = batches.par_iter().map(run_batch).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<CountRecord> = batches.iter().map(run_batch).collect();

    let mut record = CountRecord::default();
    for part in &parts {
        record.absorb(part);
    }
    record.accidentals_estimate = estimate_accidentals(&record).unwrap_or(0.0);
    record
}

/// Least-squares fit of A(1 - V cos(phi - offset)) to fringe counts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FringeFit {
    pub visibility: f64,
    pub amplitude: f64,
    pub phase_offset: f64,
    /// RMS residual of the fit.
    pub residual: f64,
    /// Propagated 1-sigma error on the visibility.
    pub visibility_stderr: f64,
}

/// Fit fringe points (phase, count). The model is linear in
/// (c0, c1, c2) with y = c0 + c1 cos(phi) + c2 sin(phi), from which
/// A = c0, V = |(c1, c2)| / c0, offset = atan2(-c2, -c1).
pub fn fit_visibility(points: &[(f64, f64)]) -> Result<FringeFit> {
    if points.len() < 5 {
        return Err(Error::InsufficientPoints(points.len()));
    }
    let span = points
        .iter()
        .map(|&(p, _)| p)
        .fold(f64::NEG_INFINITY, f64::max)
        - points
            .iter()
            .map(|&(p, _)| p)
            .fold(f64::INFINITY, f64::min);
    if span < 1.5 * std::f64::consts::PI {
        return Err(Error::DegeneratePhases(format!(
            "phase span {span:.3} rad < 1.5 pi"
        )));
    }

    // Normal equations for the 3-parameter linear model.
    let mut xtx = [[0.0f64; 3]; 3];
    let mut xty = [0.0f64; 3];
    for &(phi, y) in points {
        let row = [1.0, phi.cos(), phi.sin()];
        for i in 0..3 {
            for j in 0..3 {
                xtx[i][j] += row[i] * row[j];
            }
            xty[i] += row[i] * y;
        }
    }
    let inv = invert3(&xtx)
        .ok_or_else(|| Error::DegeneratePhases("normal matrix is singular".into()))?;
    let mut c = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i] += inv[i][j] * xty[j];
        }
    }
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    if c0 <= 0.0 {
        return Err(Error::DegeneratePhases(format!(
            "fitted mean level {c0:.3e} is not positive"
        )));
    }
    let h = c1.hypot(c2);
    let visibility = h / c0;
    let phase_offset = if h > 0.0 { (-c2).atan2(-c1) } else { 0.0 };

    let mut ssr = 0.0;
    for &(phi, y) in points {
        let model = c0 + c1 * phi.cos() + c2 * phi.sin();
        ssr += (y - model) * (y - model);
    }
    let n = points.len() as f64;
    let residual = (ssr / n).sqrt();

    // Delta-method error from the residual-based parameter covariance.
    let sigma2 = ssr / (n - 3.0);
    let grad = if h > 0.0 {
        [-visibility / c0, c1 / (c0 * h), c2 / (c0 * h)]
    } else {
        [0.0, 1.0 / c0, 1.0 / c0]
    };
    let mut var = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            var += grad[i] * sigma2 * inv[i][j] * grad[j];
        }
    }
    let visibility_stderr = var.max(0.0).sqrt();

    Ok(FringeFit {
        visibility,
        amplitude: c0,
        phase_offset,
        residual,
        visibility_stderr,
    })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let scale: f64 = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if det.abs() < 1e-12 * scale.powi(3).max(1e-300) {
        return None;
    }
    let mut inv = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b, c, d) = (
                m[(j + 1) % 3][(i + 1) % 3],
                m[(j + 1) % 3][(i + 2) % 3],
                m[(j + 2) % 3][(i + 1) % 3],
                m[(j + 2) % 3][(i + 2) % 3],
            );
            inv[i][j] = (a * d - b * c) / det;
        }
    }
    Some(inv)
}
