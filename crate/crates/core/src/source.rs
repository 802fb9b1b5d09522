//! Degenerate photon-pair source: multi-pair emission statistics, time-bin
//! qubit preparation, and the two-branch distinguishability model.

use num_complex::Complex64;

use crate::elements::{apply_delay_interferometer, InterferometerSetting};
use crate::fock::{Branch, Limits, LinearMap, Mode, Occupation, Port, PureState};
use crate::{Error, Result};

/// Pair-number distribution of the source.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PairStatistics {
    /// Single-mode squeezed-vacuum statistics: p(n) = mu^n / (1+mu)^(n+1).
    #[default]
    Thermal,
    /// Many-mode limit: p(n) = e^(-mu) mu^n / n!.
    Poissonian,
}

/// Source parameters. `mode_overlap` is the residual indistinguishability of
/// the two photons at zero delay (1 = perfectly aligned); it multiplies the
/// delay-dependent overlap of [`OverlapModel`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceConfig {
    /// Mean photon pairs per pulse.
    pub mu: f64,
    /// Largest pair number kept in the truncated source state.
    pub pair_truncation: u32,
    pub pulse_fwhm_ps: f64,
    pub statistics: PairStatistics,
    pub mode_overlap: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            mu: 0.25,
            pair_truncation: 2,
            pulse_fwhm_ps: 60.0,
            statistics: PairStatistics::Thermal,
            mode_overlap: 1.0,
        }
    }
}

impl SourceConfig {
    /// Probability of emitting exactly n pairs in a pulse.
    pub fn pair_probability(&self, n: u32) -> f64 {
        match self.statistics {
            PairStatistics::Thermal => {
                self.mu.powi(n as i32) / (1.0 + self.mu).powi(n as i32 + 1)
            }
            PairStatistics::Poissonian => {
                let mut p = (-self.mu).exp();
                for k in 1..=n {
                    p *= self.mu / k as f64;
                }
                p
            }
        }
    }

    /// Probability mass kept by the truncation.
    pub fn truncated_mass(&self) -> f64 {
        (0..=self.pair_truncation)
            .map(|n| self.pair_probability(n))
            .sum()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::BadSourceConfig(format!("mu = {}", self.mu)));
        }
        if self.pair_truncation < 1 {
            return Err(Error::BadSourceConfig("pair_truncation must be >= 1".into()));
        }
        if !(self.pulse_fwhm_ps > 0.0) {
            return Err(Error::BadSourceConfig(format!(
                "pulse_fwhm_ps = {}",
                self.pulse_fwhm_ps
            )));
        }
        if !(0.0..=1.0).contains(&self.mode_overlap) {
            return Err(Error::BadSourceConfig(format!(
                "mode_overlap = {}",
                self.mode_overlap
            )));
        }
        let tail = 1.0 - self.truncated_mass();
        if tail >= 1e-2 {
            return Err(Error::BadSourceConfig(format!(
                "truncated tail mass {tail:.4} >= 1e-2 at mu = {}",
                self.mu
            )));
        }
        Ok(())
    }

    /// Limits wide enough for the truncated pair state.
    pub fn limits(&self) -> Limits {
        Limits::with_photon_cap((2 * self.pair_truncation).max(4))
    }
}

/// Truncated pair state: sum over n of sqrt(p(n)) |n>_signal |n>_idler, with
/// the signal on port A and the idler on port B, both in the first bin.
/// The discarded tail leaves the state subnormalized by exactly that mass.
pub fn spdc_state(config: &SourceConfig) -> Result<PureState> {
    config.validate()?;
    let signal = Mode::new(Port::A, 1);
    let idler = Mode::new(Port::B, 1);
    let terms = (0..=config.pair_truncation).map(|n| {
        let amp = Complex64::new(config.pair_probability(n).sqrt(), 0.0);
        (Occupation::from_counts([(signal, n), (idler, n)]), amp)
    });
    PureState::from_terms(terms, config.limits())
}

/// Exactly one pair, used by ideal-mode experiments.
pub fn single_pair() -> PureState {
    PureState::basis(Occupation::from_counts([
        (Mode::new(Port::A, 1), 1),
        (Mode::new(Port::B, 1), 1),
    ]))
}

/// Turn the photons at `port` (first bin only) into time-bin qubits:
/// a†_{t1} -> (a†_{t1} + e^{i phase} a†_{t2})/sqrt(2). Multi-photon terms pick
/// up the binomial structure automatically.
pub fn prepare_timebin_qubit(state: &PureState, port: Port, phase: f64) -> Result<PureState> {
    apply_delay_interferometer(state, &InterferometerSetting::preparation(port, phase))
}

/// Amplitude overlap between the two interfering photons as a function of
/// their relative delay, for Gaussian pulses:
/// zeta = exp(-delay^2 / (4 sigma^2)) with sigma = FWHM / (2 sqrt(2 ln 2)).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapModel {
    pub delay_ps: f64,
    pub zeta: f64,
}

impl OverlapModel {
    pub fn from_delay(delay_ps: f64, pulse_fwhm_ps: f64) -> Self {
        let sigma = pulse_fwhm_ps / (2.0 * (2.0 * 2f64.ln()).sqrt());
        let zeta = (-delay_ps * delay_ps / (4.0 * sigma * sigma)).exp();
        OverlapModel { delay_ps, zeta }
    }

    pub fn perfect() -> Self {
        OverlapModel {
            delay_ps: 0.0,
            zeta: 1.0,
        }
    }
}

/// Split every photon at `port` into the two-branch decomposition:
/// a† -> zeta a†_parallel + sqrt(1 - zeta^2) a†_orthogonal. The orthogonal
/// branch never interferes with the parallel one downstream. Applied to one
/// of the two interfering inputs (conventionally Bob's).
pub fn apply_distinguishability(
    state: &PureState,
    port: Port,
    model: &OverlapModel,
) -> Result<PureState> {
    let zeta = model.zeta;
    assert!((0.0..=1.0).contains(&zeta), "overlap must be in [0, 1]");
    if zeta == 1.0 {
        return Ok(state.clone());
    }
    let keep = Complex64::new(zeta, 0.0);
    let split = Complex64::new((1.0 - zeta * zeta).sqrt(), 0.0);
    let mut map = LinearMap::new();
    for mode in state.mode_set() {
        if mode.port == port && mode.branch == Branch::Parallel {
            map.insert(mode, vec![(mode, keep), (mode.orthogonal(), split)]);
        }
    }
    if map.is_empty() {
        return Ok(state.clone());
    }
    map.apply(state)
}
