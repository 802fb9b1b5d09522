//! Optical elements as state transformers: the scheduled 2x2 switch with its
//! imperfections, 1-bit delay interferometers in preparation and analysis
//! roles, attenuators, and phase shifters.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::fock::{Branch, LinearMap, Mat2, Mode, Port, PureState};
use crate::{Error, Result};

/// Per-time-bin phase schedule of the 2x2 switch, plus its measured
/// imperfections. `extinction_db = INFINITY` and `insertion_loss_db = 0`
/// give the exact ideal rotation per bin.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchSchedule {
    theta: BTreeMap<u8, f64>,
    /// Power extinction ratio at the nominal bar/cross settings, in dB.
    pub extinction_db: f64,
    /// Uniform insertion loss in dB; recorded on the detection loss budget,
    /// never applied to amplitudes.
    pub insertion_loss_db: f64,
    /// When set, a photon in a bin with no scheduled angle is an error
    /// instead of defaulting to theta = 0.
    pub strict_bins: bool,
}

impl SwitchSchedule {
    /// Ideal switch: infinite extinction, zero insertion loss.
    pub fn ideal<I: IntoIterator<Item = (u8, f64)>>(angles: I) -> Self {
        SwitchSchedule {
            theta: angles.into_iter().collect(),
            extinction_db: f64::INFINITY,
            insertion_loss_db: 0.0,
            strict_bins: false,
        }
    }

    pub fn with_imperfections<I: IntoIterator<Item = (u8, f64)>>(
        angles: I,
        extinction_db: f64,
        insertion_loss_db: f64,
    ) -> Self {
        assert!(extinction_db >= 0.0 && insertion_loss_db >= 0.0);
        SwitchSchedule {
            theta: angles.into_iter().collect(),
            extinction_db,
            insertion_loss_db,
            strict_bins: false,
        }
    }

    /// Entangler setting: exchange the first bin, pass the second.
    pub fn entangler() -> Self {
        SwitchSchedule::ideal([(1, PI), (2, 0.0)])
    }

    /// 50% beamsplitter in both bins.
    pub fn fifty_fifty() -> Self {
        SwitchSchedule::ideal([(1, PI / 2.0), (2, PI / 2.0)])
    }

    /// Same imperfection parameters, different angle schedule.
    pub fn with_angles<I: IntoIterator<Item = (u8, f64)>>(&self, angles: I) -> Self {
        SwitchSchedule {
            theta: angles.into_iter().collect(),
            ..*self
        }
    }

    /// Nominal angle for a bin; missing bins default to 0 unless strict.
    pub fn theta_nominal(&self, bin: u8) -> Result<f64> {
        match self.theta.get(&bin) {
            Some(&t) => Ok(t),
            None if self.strict_bins => Err(Error::UnknownTimeBin(bin)),
            None => Ok(0.0),
        }
    }

    /// Realized angle after the finite-extinction bias. A nominal bar/cross
    /// setting (theta in {0, pi}) is offset so that the power leaked into
    /// the wrong port equals 10^(-extinction_db/10). `bias_sign` selects the
    /// offset direction; the bias voltage drifts over a measurement, so runs
    /// average the +1 and -1 components incoherently.
    pub fn theta_effective(&self, bin: u8, bias_sign: f64) -> Result<f64> {
        let nominal = self.theta_nominal(bin)?;
        if !self.extinction_db.is_finite() {
            return Ok(nominal);
        }
        let is_bar_or_cross = nominal.abs() < 1e-9 || (nominal - PI).abs() < 1e-9;
        if !is_bar_or_cross {
            return Ok(nominal);
        }
        let leak_amplitude = 10f64.powf(-self.extinction_db / 20.0);
        Ok(nominal + bias_sign * 2.0 * leak_amplitude.asin())
    }

    /// True when any scheduled bin picks up a finite-extinction offset.
    pub fn has_extinction_bias(&self) -> bool {
        self.extinction_db.is_finite()
            && self
                .theta
                .values()
                .any(|&t| t.abs() < 1e-9 || (t - PI).abs() < 1e-9)
    }

    /// Power transmission of the insertion loss.
    pub fn insertion_transmission(&self) -> f64 {
        10f64.powf(-self.insertion_loss_db / 10.0)
    }

    /// The rotation matrix for angle theta, columns = images of the two
    /// inputs: first input -> (cos(theta/2), -sin(theta/2)), second input
    /// -> (sin(theta/2), cos(theta/2)).
    pub fn rotation(theta: f64) -> Mat2 {
        let h = theta / 2.0;
        [
            [
                Complex64::new(h.cos(), 0.0),
                Complex64::new(h.sin(), 0.0),
            ],
            [
                Complex64::new(-h.sin(), 0.0),
                Complex64::new(h.cos(), 0.0),
            ],
        ]
    }
}

/// Apply the switch to every occupied time bin: photons at `in_ports` are
/// routed to `out_ports` through the per-bin rotation. The out ports must be
/// fresh (no photons there yet).
pub fn apply_switch(
    state: &PureState,
    schedule: &SwitchSchedule,
    in_ports: (Port, Port),
    out_ports: (Port, Port),
) -> Result<PureState> {
    apply_switch_biased(state, schedule, 1.0, in_ports, out_ports)
}

/// [`apply_switch`] with an explicit extinction bias direction.
pub fn apply_switch_biased(
    state: &PureState,
    schedule: &SwitchSchedule,
    bias_sign: f64,
    in_ports: (Port, Port),
    out_ports: (Port, Port),
) -> Result<PureState> {
    let (in_a, in_b) = in_ports;
    let (out_c, out_d) = out_ports;
    if in_a == in_b {
        return Err(Error::ModeCollision(Mode::new(in_a, 1)));
    }
    if out_c == out_d {
        return Err(Error::ModeCollision(Mode::new(out_c, 1)));
    }
    for port in [out_c, out_d] {
        if port == in_a || port == in_b {
            return Err(Error::ModeCollision(Mode::new(port, 1)));
        }
    }

    let mut occupied: BTreeSet<(u8, Branch)> = BTreeSet::new();
    for mode in state.mode_set() {
        if mode.port == out_c || mode.port == out_d {
            return Err(Error::ModeCollision(mode));
        }
        if mode.port == in_a || mode.port == in_b {
            occupied.insert((mode.bin, mode.branch));
        }
    }

    let mut map = LinearMap::new();
    for (bin, branch) in occupied {
        let theta = schedule.theta_effective(bin, bias_sign)?;
        let m = SwitchSchedule::rotation(theta);
        let c = Mode::with_branch(out_c, bin, branch);
        let d = Mode::with_branch(out_d, bin, branch);
        map.insert(
            Mode::with_branch(in_a, bin, branch),
            vec![(c, m[0][0]), (d, m[1][0])],
        );
        map.insert(
            Mode::with_branch(in_b, bin, branch),
            vec![(c, m[0][1]), (d, m[1][1])],
        );
    }
    map.apply(state)
}

/// Which role a 1-bit delay interferometer plays in the setup.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// Turns a photon in the first bin into a normalized time-bin qubit.
    Preparation,
    /// Interferes adjacent bins ahead of a detector; keeps only the common
    /// exit, so each photon picks up an amplitude factor of 1/2.
    Analysis,
}

/// One 1-bit delay interferometer: its port, internal phase, and role.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferometerSetting {
    pub port: Port,
    pub phase: f64,
    pub role: Role,
}

impl InterferometerSetting {
    pub fn preparation(port: Port, phase: f64) -> Self {
        InterferometerSetting {
            port,
            phase,
            role: Role::Preparation,
        }
    }

    pub fn analysis(port: Port, phase: f64) -> Self {
        InterferometerSetting {
            port,
            phase,
            role: Role::Analysis,
        }
    }
}

/// Apply a 1-bit delay interferometer at `setting.port`.
///
/// Analysis role: a†_{t} -> (a†_{t} + e^{i phi} a†_{t+1})/2 for every occupied
/// bin — subnormalized, the discarded exit paths account for the factor.
/// Preparation role: a†_{t1} -> (a†_{t1} + e^{i phi} a†_{t2})/sqrt(2), the
/// normalized qubit; its discarded paths live in the loss budget instead.
pub fn apply_delay_interferometer(
    state: &PureState,
    setting: &InterferometerSetting,
) -> Result<PureState> {
    let t_max = state.limits().t_max;
    let phase = Complex64::from_polar(1.0, setting.phase);
    let mut occupied: BTreeSet<(u8, Branch)> = BTreeSet::new();
    for mode in state.mode_set() {
        if mode.port == setting.port {
            occupied.insert((mode.bin, mode.branch));
        }
    }
    let mut map = LinearMap::new();
    match setting.role {
        Role::Analysis => {
            for &(bin, branch) in &occupied {
                if bin + 1 > t_max {
                    return Err(Error::TimeBinOverflow { bin, t_max });
                }
                let here = Mode::with_branch(setting.port, bin, branch);
                let next = Mode::with_branch(setting.port, bin + 1, branch);
                let half = Complex64::new(0.5, 0.0);
                map.insert(here, vec![(here, half), (next, half * phase)]);
            }
        }
        Role::Preparation => {
            for &(bin, branch) in &occupied {
                if bin != 1 {
                    return Err(Error::TimeBinOverflow { bin, t_max });
                }
                let here = Mode::with_branch(setting.port, 1, branch);
                let next = Mode::with_branch(setting.port, 2, branch);
                let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                map.insert(here, vec![(here, r), (next, r * phase)]);
            }
        }
    }
    map.apply(state)
}

/// Analysis interferometer with the discarded exit tracked on explicit sink
/// rails, so the map is a photon-conserving isometry:
///
/// a†_{t} -> (a†_{t} + e^{i phi} a†_{t+1})/2 + (s†_{t} - e^{i phi} s†_{t+1})/2
///
/// The kept-port amplitudes are identical to
/// [`apply_delay_interferometer`]; the sink rail makes partial-loss events
/// (one photon discarded, others detected) explicit occupation outcomes,
/// which threshold detectors need for correct singles rates on multi-photon
/// states. The amplitude-dropping form is kept for single-photon algebra.
pub fn apply_delay_interferometer_tracked(
    state: &PureState,
    setting: &InterferometerSetting,
) -> Result<PureState> {
    if setting.role == Role::Preparation {
        return apply_delay_interferometer(state, setting);
    }
    let t_max = state.limits().t_max;
    let phase = Complex64::from_polar(1.0, setting.phase);
    let sink = fresh_ancilla(state);
    let mut occupied: BTreeSet<(u8, Branch)> = BTreeSet::new();
    for mode in state.mode_set() {
        if mode.port == setting.port {
            occupied.insert((mode.bin, mode.branch));
        }
    }
    let mut map = LinearMap::new();
    let half = Complex64::new(0.5, 0.0);
    for &(bin, branch) in &occupied {
        if bin + 1 > t_max {
            return Err(Error::TimeBinOverflow { bin, t_max });
        }
        let here = Mode::with_branch(setting.port, bin, branch);
        let next = Mode::with_branch(setting.port, bin + 1, branch);
        let sink_here = Mode::with_branch(sink, bin, branch);
        let sink_next = Mode::with_branch(sink, bin + 1, branch);
        map.insert(
            here,
            vec![
                (here, half),
                (next, half * phase),
                (sink_here, half),
                (sink_next, -half * phase),
            ],
        );
    }
    map.apply(state)
}

/// Couple (port, bin) to a fresh ancilla rail: a† -> tau a† + sqrt(1-tau^2) anc†.
/// Photon number is conserved globally; ancilla photons survive until a
/// post-selection discards them.
pub fn attenuator(state: &PureState, port: Port, bin: u8, amplitude_transmission: f64) -> Result<PureState> {
    assert!(
        (0.0..=1.0).contains(&amplitude_transmission),
        "amplitude transmission must be in [0, 1]"
    );
    let tau = Complex64::new(amplitude_transmission, 0.0);
    let kappa = Complex64::new((1.0 - amplitude_transmission * amplitude_transmission).sqrt(), 0.0);
    let anc = fresh_ancilla(state);
    let mut map = LinearMap::new();
    for branch in [Branch::Parallel, Branch::Orthogonal] {
        let here = Mode::with_branch(port, bin, branch);
        let sink = Mode::with_branch(anc, bin, branch);
        map.insert(here, vec![(here, tau), (sink, kappa)]);
    }
    if map.is_empty() {
        return Ok(state.clone());
    }
    map.apply(state)
}

/// Next unused ancilla port.
fn fresh_ancilla(state: &PureState) -> Port {
    let mut next = 0u8;
    for mode in state.mode_set() {
        if let Port::Anc(k) = mode.port {
            next = next.max(k + 1);
        }
    }
    Port::Anc(next)
}

/// a† -> e^{i phi} a† at (port, bin), both branches.
pub fn phase_shift(state: &PureState, port: Port, bin: u8, phi: f64) -> Result<PureState> {
    let rot = Complex64::from_polar(1.0, phi);
    let mut map = LinearMap::new();
    for branch in [Branch::Parallel, Branch::Orthogonal] {
        let here = Mode::with_branch(port, bin, branch);
        map.insert(here, vec![(here, rot)]);
    }
    map.apply(state)
}
