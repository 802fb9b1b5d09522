//! Simulator for entangling two time-bin qubits with a fast 2x2 optical switch.
//!
//! Photons live in bosonic modes labeled by (spatial port, time bin,
//! distinguishability branch). A pure state is a sparse map from occupation
//! vectors to complex amplitudes, and every optical element reduces to a
//! linear substitution on creation operators:
//!
//! * [`elements::apply_switch`] — a Mach-Zehnder switch whose internal phase
//!   θ(t) is scheduled per time bin, with finite-extinction and insertion-loss
//!   imperfections,
//! * [`elements::apply_delay_interferometer`] — 1-bit delay interferometers in
//!   preparation and analysis roles,
//! * [`source`] — a degenerate photon-pair source with thermal or Poissonian
//!   multi-pair statistics and a two-branch distinguishability model,
//! * [`detection`] — gated threshold detectors with efficiency, dark counts
//!   and a per-port loss budget, plus seeded Monte-Carlo counting,
//! * [`experiments`] — end-to-end pipelines: the entangler itself, the
//!   Hong-Ou-Mandel dip, two-photon fringes, and bunching/anti-bunching
//!   delay scans,
//! * [`gates`] — the tunable partial-PBS switch setting and the post-selected
//!   three-switch CZ gate built from it.
//!
//! A brute-force dense oracle ([`fock::dense`]) cross-checks the sparse engine
//! on small systems.
//!
//! With the default `parallel` feature, Monte-Carlo pulses are split across
//! rayon workers; without it the same batches run sequentially. Results are
//! bitwise reproducible for a fixed (seed, worker count) either way.

pub mod detection;
pub mod elements;
pub mod experiments;
pub mod fock;
pub mod gates;
pub mod source;

use thiserror::Error;

/// Errors shared across the simulator modules.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NonUnitaryMatrix { deviation: f64 },
    #[error("occupation exceeds the photon cap of {n_max}")]
    TruncationOverflow { n_max: u32 },
    #[error("mode sets collide at {0}")]
    ModeCollision(fock::Mode),
    #[error("no term survives the projection")]
    EmptyProjection,
    #[error("dense oracle limit exceeded ({modes} modes, {photons} photons)")]
    DimensionTooLarge { modes: usize, photons: u32 },
    #[error("photon in time bin {bin} cannot be shifted past bin {t_max}")]
    TimeBinOverflow { bin: u8, t_max: u8 },
    #[error("no switch angle scheduled for time bin {0}")]
    UnknownTimeBin(u8),
    #[error("gate input must carry exactly one photon per qubit port")]
    NotSinglePhotonInput,
    #[error("source configuration invalid: {0}")]
    BadSourceConfig(String),
    #[error("fringe fit needs at least 5 points, got {0}")]
    InsufficientPoints(usize),
    #[error("fringe fit phases are degenerate: {0}")]
    DegeneratePhases(String),
    #[error("count record has zero start pulses")]
    ZeroStarts,
}

pub type Result<T> = std::result::Result<T, Error>;
