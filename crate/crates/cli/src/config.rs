//! Flat-sectioned key-value config files and their canonical serialization.
//!
//! Sections: `[source]`, `[switch]`, `[detectors]`, `[run]`. Every key has a
//! default matching the measured device parameters, so an empty config
//! reproduces the reference conditions.

use std::fmt::Write as _;

use tbsim_core::detection::DetectorConfig;
use tbsim_core::elements::SwitchSchedule;
use tbsim_core::experiments::{ExperimentConfig, Phases};
use tbsim_core::fock::Port;
use tbsim_core::source::{PairStatistics, SourceConfig};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Parsed config file contents plus run settings.
#[derive(Clone, Debug, PartialEq)]
pub struct FileConfig {
    // [source]
    pub mu: f64,
    pub pair_truncation: u32,
    pub pulse_fwhm_ps: f64,
    pub statistics: PairStatistics,
    pub mode_overlap: f64,
    // [switch]
    pub extinction_db: f64,
    pub insertion_loss_db: f64,
    // [detectors]
    pub efficiency: f64,
    pub dark_prob_per_gate: f64,
    // [run]
    pub pulses: u64,
    pub seed: u64,
    pub workers: usize,
    pub phase_alice: f64,
    pub phase_bob: f64,
}

impl Default for FileConfig {
    fn default() -> Self {
        FileConfig {
            mu: 0.25,
            pair_truncation: 3,
            pulse_fwhm_ps: 60.0,
            statistics: PairStatistics::Thermal,
            mode_overlap: 0.90,
            extinction_db: 20.0,
            insertion_loss_db: 4.0,
            efficiency: 0.08,
            dark_prob_per_gate: 2e-6,
            pulses: 10_000_000,
            seed: 1,
            workers: 4,
            phase_alice: 0.0,
            phase_bob: 0.0,
        }
    }
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = FileConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError(format!("line {}: malformed section", lineno + 1)))?;
                section = name.trim().to_ascii_lowercase();
                if !matches!(section.as_str(), "source" | "switch" | "detectors" | "run") {
                    return Err(ConfigError(format!(
                        "line {}: unknown section [{section}]",
                        lineno + 1
                    )));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim();
            cfg.apply(&section, &key, value)
                .map_err(|e| ConfigError(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(value: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            value.parse().map_err(|e| format!("bad value {value:?}: {e}"))
        }
        match (section, key) {
            ("source", "mu") => self.mu = num(value)?,
            ("source", "pair_truncation") => self.pair_truncation = num(value)?,
            ("source", "pulse_fwhm_ps") => self.pulse_fwhm_ps = num(value)?,
            ("source", "statistics") => {
                self.statistics = match value.to_ascii_lowercase().as_str() {
                    "thermal" => PairStatistics::Thermal,
                    "poissonian" => PairStatistics::Poissonian,
                    other => return Err(format!("unknown statistics {other:?}")),
                }
            }
            ("source", "mode_overlap") => self.mode_overlap = num(value)?,
            ("switch", "extinction_db") => {
                self.extinction_db = if value.eq_ignore_ascii_case("inf") {
                    f64::INFINITY
                } else {
                    num(value)?
                }
            }
            ("switch", "insertion_loss_db") => self.insertion_loss_db = num(value)?,
            ("detectors", "efficiency") => self.efficiency = num(value)?,
            ("detectors", "dark_prob_per_gate") => self.dark_prob_per_gate = num(value)?,
            ("run", "pulses") => self.pulses = num(value)?,
            ("run", "seed") => self.seed = num(value)?,
            ("run", "workers") => self.workers = num(value)?,
            ("run", "phase_alice") => self.phase_alice = num(value)?,
            ("run", "phase_bob") => self.phase_bob = num(value)?,
            _ => return Err(format!("unknown key {key:?} in section [{section}]")),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(ConfigError(format!("efficiency {}", self.efficiency)));
        }
        if !(0.0..1.0).contains(&self.dark_prob_per_gate) {
            return Err(ConfigError(format!(
                "dark_prob_per_gate {}",
                self.dark_prob_per_gate
            )));
        }
        if self.pulses == 0 {
            return Err(ConfigError("pulses must be >= 1".into()));
        }
        if self.workers == 0 {
            return Err(ConfigError("workers must be >= 1".into()));
        }
        let source = SourceConfig {
            mu: self.mu,
            pair_truncation: self.pair_truncation,
            pulse_fwhm_ps: self.pulse_fwhm_ps,
            statistics: self.statistics,
            mode_overlap: self.mode_overlap,
        };
        source
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        Ok(())
    }

    pub fn to_experiment(&self, ideal: bool) -> ExperimentConfig {
        let mut cfg = if ideal {
            ExperimentConfig::ideal()
        } else {
            ExperimentConfig {
                source: SourceConfig {
                    mu: self.mu,
                    pair_truncation: self.pair_truncation,
                    pulse_fwhm_ps: self.pulse_fwhm_ps,
                    statistics: self.statistics,
                    mode_overlap: self.mode_overlap,
                },
                schedule: SwitchSchedule::with_imperfections(
                    [(1, std::f64::consts::PI), (2, 0.0)],
                    self.extinction_db,
                    self.insertion_loss_db,
                ),
                phases: Phases::default(),
                detectors: [
                    DetectorConfig {
                        port: Port::C,
                        gate_bin: 2,
                        efficiency: self.efficiency,
                        dark_prob: self.dark_prob_per_gate,
                    },
                    DetectorConfig {
                        port: Port::D,
                        gate_bin: 2,
                        efficiency: self.efficiency,
                        dark_prob: self.dark_prob_per_gate,
                    },
                ],
                pulses: self.pulses,
                seed: self.seed,
                workers: self.workers,
                ideal: false,
            }
        };
        cfg.phases.alice = self.phase_alice;
        cfg.phases.bob = self.phase_bob;
        cfg.pulses = self.pulses;
        cfg.seed = self.seed;
        cfg.workers = self.workers;
        cfg
    }

    /// Deterministic serialization used for hashing and the manifest.
    pub fn canonical(&self, ideal: bool) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[source]");
        let _ = writeln!(s, "mu = {}", self.mu);
        let _ = writeln!(s, "pair_truncation = {}", self.pair_truncation);
        let _ = writeln!(s, "pulse_fwhm_ps = {}", self.pulse_fwhm_ps);
        let _ = writeln!(
            s,
            "statistics = {}",
            match self.statistics {
                PairStatistics::Thermal => "thermal",
                PairStatistics::Poissonian => "poissonian",
            }
        );
        let _ = writeln!(s, "mode_overlap = {}", self.mode_overlap);
        let _ = writeln!(s, "[switch]");
        let _ = writeln!(s, "extinction_db = {}", self.extinction_db);
        let _ = writeln!(s, "insertion_loss_db = {}", self.insertion_loss_db);
        let _ = writeln!(s, "[detectors]");
        let _ = writeln!(s, "efficiency = {}", self.efficiency);
        let _ = writeln!(s, "dark_prob_per_gate = {}", self.dark_prob_per_gate);
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "pulses = {}", self.pulses);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "phase_alice = {}", self.phase_alice);
        let _ = writeln!(s, "phase_bob = {}", self.phase_bob);
        let _ = writeln!(s, "ideal = {}", ideal);
        s
    }
}

/// FNV-1a 64-bit hash of the canonical config text.
pub fn fnv1a64(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Parse a phase token: multiples of pi ("pi/2", "2pi", "3pi/2") or radians.
pub fn parse_phase(token: &str) -> Result<f64, ConfigError> {
    let t = token.trim().to_ascii_lowercase();
    let table = [
        ("0", 0.0),
        ("pi", std::f64::consts::PI),
        ("pi/2", std::f64::consts::FRAC_PI_2),
        ("3pi/2", 1.5 * std::f64::consts::PI),
        ("2pi", std::f64::consts::TAU),
    ];
    for (name, value) in table {
        if t == name {
            return Ok(value);
        }
    }
    t.parse()
        .map_err(|_| ConfigError(format!("cannot parse phase {token:?}")))
}

/// Parse a scan grid: either "start:end:step" (inclusive) or a comma list.
pub fn parse_grid(token: &str) -> Result<Vec<f64>, ConfigError> {
    let t = token.trim();
    if t.is_empty() {
        return Err(ConfigError("empty scan grid".into()));
    }
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() != 3 {
            return Err(ConfigError(format!("bad range {token:?}")));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("bad number {p:?}")))
            })
            .collect::<Result<_, _>>()?;
        let (start, end, step) = (nums[0], nums[1], nums[2]);
        if step <= 0.0 || end < start {
            return Err(ConfigError(format!("bad range {token:?}")));
        }
        let mut out = Vec::new();
        let mut k = 0u32;
        loop {
            let value = start + step * k as f64;
            if value > end + 1e-9 {
                break;
            }
            out.push(value);
            k += 1;
        }
        Ok(out)
    } else {
        t.split(',')
            .map(|p| {
                p.trim()
                    .parse()
                    .map_err(|_| ConfigError(format!("bad number {p:?}")))
            })
            .collect()
    }
}
