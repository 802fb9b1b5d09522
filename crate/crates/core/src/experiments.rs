//! End-to-end pipelines: the switch entangler, the Hong-Ou-Mandel dip,
//! two-photon fringe scans, bunching/anti-bunching delay scans, and the
//! entanglement witness.
//!
//! Every scan offers an analytic path (exact click probabilities) and a
//! sampled path (Monte-Carlo counts); acceptance-style checks use the
//! analytic path where possible and sampling for count realism.

use crate::detection::{
    click_probabilities_mixed, derive_seed, run_monte_carlo_mixed, subtracted_coincidences,
    CountRecord, DetectorConfig, FringeFit, LossBudget, StateMixture,
};
use crate::elements::{
    apply_delay_interferometer_tracked, apply_switch, apply_switch_biased,
    InterferometerSetting, SwitchSchedule,
};

use crate::fock::{project, Limits, Occupation, Port, PureState};
use crate::source::{
    apply_distinguishability, prepare_timebin_qubit, single_pair, spdc_state, OverlapModel,
    SourceConfig,
};
use crate::{detection::fit_visibility, Result};

/// Interferometer phases of the four parties: Alice and Bob prepare,
/// Charlie and David analyze.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Phases {
    pub alice: f64,
    pub bob: f64,
    pub charlie: f64,
    pub david: f64,
}

/// Everything needed to run one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: SourceConfig,
    pub schedule: SwitchSchedule,
    pub phases: Phases,
    pub detectors: [DetectorConfig; 2],
    pub pulses: u64,
    pub seed: u64,
    pub workers: usize,
    /// Disables every imperfection: exactly one pair, unit efficiency, no
    /// darks, infinite extinction, unit loss budget, perfect overlap.
    pub ideal: bool,
}

impl ExperimentConfig {
    /// Fully ideal settings.
    pub fn ideal() -> Self {
        ExperimentConfig {
            source: SourceConfig {
                pair_truncation: 1,
                ..SourceConfig::default()
            },
            schedule: SwitchSchedule::entangler(),
            phases: Phases::default(),
            detectors: [
                DetectorConfig::ideal(Port::C, 2),
                DetectorConfig::ideal(Port::D, 2),
            ],
            pulses: 100_000,
            seed: 1,
            workers: 4,
            ideal: true,
        }
    }

    /// The measured device parameters: mu = 0.25 thermal pairs, 8%
    /// efficiency, 2e-6 darks, 20 dB extinction, 4 dB insertion loss, 60 ps
    /// pulses. Pair truncation 3 keeps the multi-pair coincidence floor that
    /// truncation at 2 would cut, and `mode_overlap` carries the residual
    /// alignment mismatch calibrated against the measured dip visibility.
    pub fn reference_noise() -> Self {
        ExperimentConfig {
            source: SourceConfig {
                mu: 0.25,
                pair_truncation: 3,
                pulse_fwhm_ps: 60.0,
                mode_overlap: 0.90,
                ..SourceConfig::default()
            },
            schedule: SwitchSchedule::with_imperfections(
                [(1, std::f64::consts::PI), (2, 0.0)],
                20.0,
                4.0,
            ),
            phases: Phases::default(),
            detectors: [
                DetectorConfig::new(Port::C, 2),
                DetectorConfig::new(Port::D, 2),
            ],
            pulses: 1_000_000,
            seed: 1,
            workers: 4,
            ideal: false,
        }
    }

    /// Source state entering the preparation stage.
    fn source_state(&self) -> Result<PureState> {
        if self.ideal {
            Ok(single_pair())
        } else {
            spdc_state(&self.source)
        }
    }

    /// Residual overlap times the delay-dependent overlap.
    fn overlap_at(&self, delay_ps: f64) -> OverlapModel {
        let gauss = OverlapModel::from_delay(delay_ps, self.source.pulse_fwhm_ps);
        let base = if self.ideal { 1.0 } else { self.source.mode_overlap };
        OverlapModel {
            delay_ps,
            zeta: (base * gauss.zeta).clamp(0.0, 1.0),
        }
    }

    /// Detectors with the gate moved to `bin`, idealized in ideal mode.
    fn gated_detectors(&self, bin: u8) -> [DetectorConfig; 2] {
        let mut dets = self.detectors;
        for det in &mut dets {
            det.gate_bin = bin;
            if self.ideal {
                det.efficiency = 1.0;
                det.dark_prob = 0.0;
            }
        }
        dets
    }

    /// Loss budget at the detectors: switch insertion loss on both output
    /// ports, plus the preparation-interferometer discard (amplitude map /2
    /// normalized to /sqrt(2), i.e. a power factor 1/2 per photon) when the
    /// preparation stage is part of the pipeline.
    fn budget(&self, with_preparation: bool) -> LossBudget {
        let mut budget = LossBudget::transparent();
        if self.ideal {
            return budget;
        }
        for port in [self.detectors[0].port, self.detectors[1].port] {
            budget.apply_db(port, self.schedule.insertion_loss_db);
            if with_preparation {
                budget.apply_factor(port, 0.5);
            }
        }
        budget
    }

    fn schedule_effective(&self) -> SwitchSchedule {
        if self.ideal {
            SwitchSchedule::entangler()
        } else {
            self.schedule.clone()
        }
    }

    /// 50/50 schedule carrying this config's imperfections.
    fn fifty_fifty_effective(&self) -> SwitchSchedule {
        let half = std::f64::consts::FRAC_PI_2;
        if self.ideal {
            SwitchSchedule::fifty_fifty()
        } else {
            self.schedule.with_angles([(1, half), (2, half)])
        }
    }
}

/// Exact per-point probabilities from the final optical state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CoincidenceProbs {
    pub click_c: f64,
    pub click_d: f64,
    pub coincidence: f64,
}

/// One scan setting: the exact probabilities and, when sampled, the counts.
#[derive(Clone, Debug)]
pub struct ScanPoint {
    pub setting: f64,
    pub analytic: CoincidenceProbs,
    pub record: Option<CountRecord>,
}

impl ScanPoint {
    /// Observed coincidence rate, falling back to the analytic value.
    pub fn rate(&self) -> f64 {
        match &self.record {
            Some(rec) => rec.rate(),
            None => self.analytic.coincidence,
        }
    }
}

/// Scan output: points ordered by strictly increasing setting.
#[derive(Clone, Debug)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub seed: u64,
}

/// State after qubit preparation and the distinguishability split, before
/// the switch.
fn prepared_state(cfg: &ExperimentConfig, overlap: &OverlapModel) -> Result<PureState> {
    let mut state = cfg.source_state()?;
    state = prepare_timebin_qubit(&state, Port::A, cfg.phases.alice)?;
    state = prepare_timebin_qubit(&state, Port::B, cfg.phases.bob)?;
    state = apply_distinguishability(&state, Port::B, overlap)?;
    Ok(state)
}

/// Pass a state through the switch. A finite extinction bias drifts over a
/// measurement, so it enters as an equal-weight incoherent mixture of the
/// two offset directions; ideal or unbiased schedules give one component.
fn switched_mixture(cfg: &ExperimentConfig, state: &PureState, schedule: &SwitchSchedule) -> Result<StateMixture> {
    let ports = ((Port::A, Port::B), (Port::C, Port::D));
    if !cfg.ideal && schedule.has_extinction_bias() {
        Ok(vec![
            (0.5, apply_switch_biased(state, schedule, 1.0, ports.0, ports.1)?),
            (0.5, apply_switch_biased(state, schedule, -1.0, ports.0, ports.1)?),
        ])
    } else {
        Ok(vec![(1.0, apply_switch(state, schedule, ports.0, ports.1)?)])
    }
}

/// Run the entangling switch and post-select one-or-more photons at each
/// output port. Returns the post-selected state and the success probability.
pub fn run_entangler(cfg: &ExperimentConfig) -> Result<(PureState, f64)> {
    let state = prepared_state(cfg, &cfg.overlap_at(0.0))?;
    let switched = apply_switch(
        &state,
        &cfg.schedule_effective(),
        (Port::A, Port::B),
        (Port::C, Port::D),
    )?;
    project(&switched, |occ| {
        occ.at_port(Port::C) >= 1 && occ.at_port(Port::D) >= 1
    })
}

/// The ideal post-selected target: (-|t1 t1> + e^{i(phi_a+phi_b)} |t2 t2>)/sqrt(2)
/// on ports C and D.
pub fn entangler_target(phi_a: f64, phi_b: f64) -> PureState {
    use crate::fock::Mode;
    use num_complex::Complex64;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let t1t1 = Occupation::from_counts([(Mode::new(Port::C, 1), 1), (Mode::new(Port::D, 1), 1)]);
    let t2t2 = Occupation::from_counts([(Mode::new(Port::C, 2), 1), (Mode::new(Port::D, 2), 1)]);
    PureState::from_terms(
        [
            (t1t1, Complex64::new(-r, 0.0)),
            (t2t2, Complex64::from_polar(r, phi_a + phi_b)),
        ],
        Limits::default(),
    )
    .expect("target state is in range")
}

/// Normalized coincidence law: (1 - V cos(phi_a + phi_b - phi_c - phi_d))/2.
pub fn analytic_coincidence(phi_a: f64, phi_b: f64, phi_c: f64, phi_d: f64, v: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&v));
    0.5 * (1.0 - v * (phi_a + phi_b - phi_c - phi_d).cos())
}

/// Werner-state entanglement witness: visibility strictly above 1/3.
pub fn werner_witness(visibility: f64) -> bool {
    visibility > 1.0 / 3.0
}

/// Apply the analysis interferometers (discard rails tracked for correct
/// singles) to an already-switched mixture.
fn analyze_mixture(mixture: &StateMixture, phi_c: f64, phi_d: f64) -> Result<StateMixture> {
    let mut out = Vec::new();
    for (weight, component) in mixture {
        let after_c = apply_delay_interferometer_tracked(
            component,
            &InterferometerSetting::analysis(Port::C, phi_c),
        )?;
        let after_d = apply_delay_interferometer_tracked(
            &after_c,
            &InterferometerSetting::analysis(Port::D, phi_d),
        )?;
        out.push((*weight, after_d));
    }
    Ok(out)
}

/// Final mixture of the fringe/delay pipeline: preparation,
/// distinguishability, entangling switch, then analysis interferometers at
/// Charlie and David.
fn analyzed_mixture(
    cfg: &ExperimentConfig,
    phi_c: f64,
    phi_d: f64,
    overlap: &OverlapModel,
) -> Result<StateMixture> {
    let state = prepared_state(cfg, overlap)?;
    let schedule = cfg.schedule_effective();
    let switched = switched_mixture(cfg, &state, &schedule)?;
    analyze_mixture(&switched, phi_c, phi_d)
}

/// Final mixture of the HOM pipeline: source photons (no time-bin
/// preparation), distinguishability at the given delay, 50/50 switch, no
/// analysis.
fn hom_mixture(cfg: &ExperimentConfig, delay_ps: f64) -> Result<StateMixture> {
    let mut state = cfg.source_state()?;
    state = apply_distinguishability(&state, Port::B, &cfg.overlap_at(delay_ps))?;
    switched_mixture(cfg, &state, &cfg.fifty_fifty_effective())
}

fn measure_point(
    cfg: &ExperimentConfig,
    mixture: &StateMixture,
    gate_bin: u8,
    with_preparation: bool,
    setting: f64,
    point_seed: u64,
    sample: bool,
) -> ScanPoint {
    let detectors = cfg.gated_detectors(gate_bin);
    let budget = cfg.budget(with_preparation);
    let dist = click_probabilities_mixed(mixture, &detectors, &budget);
    let analytic = CoincidenceProbs {
        click_c: dist.marginal(0),
        click_d: dist.marginal(1),
        coincidence: dist.coincidence(),
    };
    let record = sample.then(|| {
        run_monte_carlo_mixed(
            mixture,
            &detectors,
            &budget,
            cfg.pulses,
            point_seed,
            cfg.workers,
        )
    });
    ScanPoint {
        setting,
        analytic,
        record,
    }
}

fn ordered(settings: &[f64]) -> Vec<f64> {
    let mut s = settings.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("scan settings must be finite"));
    s.dedup();
    s
}

/// Coincidences at the first-bin gate versus the relative delay between the
/// two photons, with the switch driven as a 50% beamsplitter and the
/// analysis interferometers removed.
pub fn hom_scan(delays_ps: &[f64], cfg: &ExperimentConfig, sample: bool) -> Result<ScanResult> {
    let mut points = Vec::new();
    for (idx, &delay) in ordered(delays_ps).iter().enumerate() {
        let mixture = hom_mixture(cfg, delay)?;
        points.push(measure_point(
            cfg,
            &mixture,
            1,
            false,
            delay,
            derive_seed(cfg.seed, idx as u64),
            sample,
        ));
    }
    Ok(ScanResult {
        points,
        seed: cfg.seed,
    })
}

/// Coincidence fringe versus Charlie's analysis phase at a fixed David
/// phase, gated on the second bin.
pub fn fringe_scan(
    charlie_phases: &[f64],
    david_phase: f64,
    cfg: &ExperimentConfig,
    sample: bool,
) -> Result<ScanResult> {
    let overlap = cfg.overlap_at(0.0);
    // The switch stage does not depend on Charlie's phase.
    let prepared = prepared_state(cfg, &overlap)?;
    let switched = switched_mixture(cfg, &prepared, &cfg.schedule_effective())?;
    let mut points = Vec::new();
    for (idx, &phi_c) in ordered(charlie_phases).iter().enumerate() {
        let mixture = analyze_mixture(&switched, phi_c, david_phase)?;
        points.push(measure_point(
            cfg,
            &mixture,
            2,
            true,
            phi_c,
            derive_seed(cfg.seed, idx as u64),
            sample,
        ));
    }
    Ok(ScanResult {
        points,
        seed: cfg.seed,
    })
}

/// Coincidences versus relative delay at fixed analysis phases, gated on the
/// second bin. Charlie's phase selects bunching (2 pi) or anti-bunching (pi).
pub fn delay_scan(
    delays_ps: &[f64],
    charlie_phase: f64,
    cfg: &ExperimentConfig,
    sample: bool,
) -> Result<ScanResult> {
    let mut points = Vec::new();
    for (idx, &delay) in ordered(delays_ps).iter().enumerate() {
        let mixture =
            analyzed_mixture(cfg, charlie_phase, cfg.phases.david, &cfg.overlap_at(delay))?;
        points.push(measure_point(
            cfg,
            &mixture,
            2,
            true,
            delay,
            derive_seed(cfg.seed, idx as u64),
            sample,
        ));
    }
    Ok(ScanResult {
        points,
        seed: cfg.seed,
    })
}

/// Dip summary of a delay-type scan: plateau from the far points, minimum
/// over the scan, visibility = (plateau - min)/plateau.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DipStats {
    pub plateau: f64,
    pub minimum: f64,
    pub visibility: f64,
    /// Poisson-propagated 1-sigma error (0 for analytic scans).
    pub visibility_stderr: f64,
}

/// Compute dip statistics, treating points with |setting| >= `far_threshold`
/// as the plateau. Falls back to the two outermost points if none qualify.
pub fn dip_stats(result: &ScanResult, far_threshold: f64) -> DipStats {
    let far: Vec<&ScanPoint> = result
        .points
        .iter()
        .filter(|p| p.setting.abs() >= far_threshold)
        .collect();
    let far = if far.is_empty() {
        let mut edges = vec![];
        if let Some(first) = result.points.first() {
            edges.push(first);
        }
        if result.points.len() > 1 {
            edges.push(result.points.last().expect("nonempty"));
        }
        edges
    } else {
        far
    };
    let plateau = far.iter().map(|p| p.rate()).sum::<f64>() / far.len() as f64;
    let min_point = result
        .points
        .iter()
        .min_by(|a, b| a.rate().partial_cmp(&b.rate()).expect("finite rates"))
        .expect("scan has points");
    let minimum = min_point.rate();
    let visibility = (plateau - minimum) / plateau;

    // Poisson errors when counts are available.
    let stderr = if result.points.iter().all(|p| p.record.is_some()) {
        let starts = min_point.record.as_ref().map(|r| r.starts as f64).unwrap_or(1.0);
        let var_min = minimum.max(1.0 / starts) / starts;
        let far_starts: f64 = far
            .iter()
            .map(|p| p.record.as_ref().map(|r| r.starts as f64).unwrap_or(1.0))
            .sum();
        let var_plateau = plateau.max(1.0 / far_starts) / far_starts;
        ((var_min + (minimum / plateau).powi(2) * var_plateau) / (plateau * plateau)).sqrt()
    } else {
        0.0
    };

    DipStats {
        plateau,
        minimum,
        visibility,
        visibility_stderr: stderr,
    }
}

/// Raw and accidental-subtracted fringe fits plus singles flatness.
#[derive(Clone, Debug)]
pub struct FringeSummary {
    pub raw: FringeFit,
    pub subtracted: FringeFit,
    /// Fit of the singles trace; a flat trace fits visibility 0 within error.
    pub singles: FringeFit,
    /// Largest |z| of per-point singles against their mean, Poisson units.
    pub singles_max_z: f64,
    pub witness_raw: bool,
    pub witness_subtracted: bool,
}

/// Fit the raw and subtracted fringes of a sampled fringe scan.
pub fn fringe_summary(result: &ScanResult) -> Result<FringeSummary> {
    let mut raw_points = Vec::new();
    let mut sub_points = Vec::new();
    let mut singles = Vec::new();
    for point in &result.points {
        match &point.record {
            Some(rec) => {
                raw_points.push((point.setting, rec.coincidences as f64));
                sub_points.push((point.setting, subtracted_coincidences(rec)?));
                singles.push(rec.singles_c as f64);
            }
            None => {
                let acc = point.analytic.click_c * point.analytic.click_d;
                raw_points.push((point.setting, point.analytic.coincidence));
                sub_points.push((
                    point.setting,
                    (point.analytic.coincidence - acc).max(0.0),
                ));
                singles.push(point.analytic.click_c);
            }
        }
    }
    let raw = fit_visibility(&raw_points)?;
    let subtracted = fit_visibility(&sub_points)?;
    let singles_points: Vec<(f64, f64)> = raw_points
        .iter()
        .map(|&(phi, _)| phi)
        .zip(singles.iter().copied())
        .collect();
    let singles_fit = fit_visibility(&singles_points)?;
    let mean = singles.iter().sum::<f64>() / singles.len() as f64;
    let singles_max_z = singles
        .iter()
        .map(|&s| (s - mean).abs() / mean.sqrt().max(1e-300))
        .fold(0.0, f64::max);
    Ok(FringeSummary {
        witness_raw: werner_witness(raw.visibility),
        witness_subtracted: werner_witness(subtracted.visibility),
        raw,
        subtracted,
        singles: singles_fit,
        singles_max_z,
    })
}
