//! Command-line front end: deterministic scans of the time-bin switching
//! experiments with plot-ready CSV output.
//!
//! Exit codes: 0 success, 2 config error, 3 runtime failure, 4 gate
//! contract violation.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use config::{fnv1a64, parse_grid, parse_phase, ConfigError, FileConfig};
use tbsim_core::experiments::{
    delay_scan, dip_stats, fringe_scan, fringe_summary, hom_scan, ExperimentConfig, ScanResult,
};
use tbsim_core::gates;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUN: u8 = 3;
const EXIT_GATE: u8 = 4;

/// Environment variable holding the default config path.
const CONFIG_ENV: &str = "TBSIM_CONFIG";

#[derive(Parser)]
#[command(
    name = "tbsim",
    version,
    about = "Time-bin qubit switching simulator",
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Config file path (defaults to $TBSIM_CONFIG when set).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Pulses per scan point.
    #[arg(long)]
    pulses: Option<u64>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte-Carlo worker count (one RNG stream each).
    #[arg(long)]
    workers: Option<usize>,
    /// Disable every imperfection.
    #[arg(long)]
    ideal: bool,
    /// Write CSV here instead of stdout (also writes a .manifest.json).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Hong-Ou-Mandel dip: coincidences vs relative photon delay.
    HomScan {
        #[command(flatten)]
        common: Common,
        /// Delays in ps: "start:end:step" or comma list.
        #[arg(long, default_value = "-240:240:30", allow_hyphen_values = true)]
        delays: String,
    },
    /// Two-photon fringe: coincidences vs Charlie's analysis phase.
    FringeScan {
        #[command(flatten)]
        common: Common,
        /// David's analysis phase (0 or pi/2 in the reference runs).
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        david_phase: String,
        /// Charlie phases in radians: "start:end:step" or comma list.
        #[arg(long, allow_hyphen_values = true)]
        phases: Option<String>,
    },
    /// Bunching/anti-bunching: coincidences vs delay at fixed phases.
    DelayScan {
        #[command(flatten)]
        common: Common,
        /// Charlie's analysis phase (pi = anti-bunching, 2pi = bunching).
        #[arg(long, default_value = "pi", allow_hyphen_values = true)]
        charlie_phase: String,
        /// Delays in ps.
        #[arg(long, default_value = "-240:240:60", allow_hyphen_values = true)]
        delays: String,
    },
    /// Verify the three-switch CZ construction and emit its report.
    CzCheck {
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-run with a finite switch extinction; reported, not asserted.
        #[arg(long)]
        extinction_db: Option<f64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "tbsim: {}", self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(err: ConfigError) -> Self {
        CliError {
            code: EXIT_CONFIG,
            message: err.to_string(),
        }
    }
}

impl From<tbsim_core::Error> for CliError {
    fn from(err: tbsim_core::Error) -> Self {
        CliError {
            code: EXIT_RUN,
            message: format!("run failed: {err}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError {
            code: EXIT_RUN,
            message: format!("io error: {err}"),
        }
    }
}

/// Loaded configuration with overrides applied, plus hash material.
struct Loaded {
    experiment: ExperimentConfig,
    canonical: String,
    hash: u64,
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let path = common
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| CliError {
                code: EXIT_CONFIG,
                message: format!("cannot read config {}: {e}", p.display()),
            })?;
            FileConfig::parse(&text)?
        }
        None => FileConfig::default(),
    };
    if let Some(pulses) = common.pulses {
        file.pulses = pulses;
    }
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    if let Some(workers) = common.workers {
        file.workers = workers;
    }
    if file.pulses == 0 || file.workers == 0 {
        return Err(CliError {
            code: EXIT_CONFIG,
            message: "pulses and workers must be >= 1".into(),
        });
    }
    let canonical = file.canonical(common.ideal);
    let hash = fnv1a64(&canonical);
    Ok(Loaded {
        experiment: file.to_experiment(common.ideal),
        canonical,
        hash,
    })
}

fn emit(common: &Common, body: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn write_manifest(
    common: &Common,
    command: &str,
    loaded: &Loaded,
    started: Instant,
) -> Result<(), CliError> {
    if let Some(out) = &common.out {
        let manifest = output::RunManifest::new(
            command,
            loaded.hash,
            loaded.canonical.clone(),
            loaded.experiment.seed,
            loaded.experiment.workers,
            loaded.experiment.pulses,
            out,
            started.elapsed(),
        );
        manifest.write_beside(out)?;
    }
    Ok(())
}

fn sampled(scan: &ScanResult) -> Result<(), CliError> {
    if scan.points.iter().any(|p| p.record.is_none()) {
        return Err(CliError {
            code: EXIT_RUN,
            message: "scan produced no counts".into(),
        });
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::HomScan { common, delays } => {
            let started = Instant::now();
            let loaded = load(&common)?;
            let grid = parse_grid(&delays)?;
            let scan = hom_scan(&grid, &loaded.experiment, true)?;
            sampled(&scan)?;
            let meta =
                output::metadata("hom-scan", loaded.hash, scan.seed, loaded.experiment.workers);
            emit(&common, &output::delay_csv(&meta, &scan))?;
            let stats = dip_stats(&scan, 3.0 * loaded.experiment.source.pulse_fwhm_ps);
            eprintln!(
                "hom-scan: dip visibility = {:.4} +/- {:.4} (plateau {:.4e}/pulse, min {:.4e}/pulse)",
                stats.visibility, stats.visibility_stderr, stats.plateau, stats.minimum
            );
            write_manifest(&common, "hom-scan", &loaded, started)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::FringeScan {
            common,
            david_phase,
            phases,
        } => {
            let started = Instant::now();
            let loaded = load(&common)?;
            let david = parse_phase(&david_phase)?;
            let grid = match phases {
                Some(list) => parse_grid(&list)?,
                None => (0..12)
                    .map(|k| k as f64 * std::f64::consts::TAU / 12.0)
                    .collect(),
            };
            if grid.len() < 5 {
                return Err(CliError {
                    code: EXIT_CONFIG,
                    message: "fringe scan needs at least 5 phases".into(),
                });
            }
            let scan = fringe_scan(&grid, david, &loaded.experiment, true)?;
            sampled(&scan)?;
            let meta = output::metadata(
                "fringe-scan",
                loaded.hash,
                scan.seed,
                loaded.experiment.workers,
            );
            emit(&common, &output::fringe_csv(&meta, &scan))?;
            let summary = fringe_summary(&scan)?;
            eprintln!(
                "fringe-scan (david = {david}): raw V = {:.4} +/- {:.4} [witness: {}], subtracted V = {:.4} +/- {:.4} [witness: {}]",
                summary.raw.visibility,
                summary.raw.visibility_stderr,
                if summary.witness_raw { "entangled" } else { "not shown" },
                summary.subtracted.visibility,
                summary.subtracted.visibility_stderr,
                if summary.witness_subtracted { "entangled" } else { "not shown" },
            );
            eprintln!(
                "fringe-scan: singles fit V = {:.5} +/- {:.5} (max |z| = {:.2})",
                summary.singles.visibility,
                summary.singles.visibility_stderr,
                summary.singles_max_z
            );
            write_manifest(&common, "fringe-scan", &loaded, started)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::DelayScan {
            common,
            charlie_phase,
            delays,
        } => {
            let started = Instant::now();
            let loaded = load(&common)?;
            let charlie = parse_phase(&charlie_phase)?;
            let grid = parse_grid(&delays)?;
            let scan = delay_scan(&grid, charlie, &loaded.experiment, true)?;
            sampled(&scan)?;
            let meta = output::metadata(
                "delay-scan",
                loaded.hash,
                scan.seed,
                loaded.experiment.workers,
            );
            emit(&common, &output::delay_csv(&meta, &scan))?;
            let far = 3.0 * loaded.experiment.source.pulse_fwhm_ps;
            let stats = dip_stats(&scan, far);
            let zero = scan
                .points
                .iter()
                .min_by(|a, b| a.setting.abs().total_cmp(&b.setting.abs()))
                .expect("scan has points");
            eprintln!(
                "delay-scan (charlie = {charlie}): rate(0)/plateau = {:.4} (plateau {:.4e}/pulse)",
                zero.rate() / stats.plateau,
                stats.plateau
            );
            write_manifest(&common, "delay-scan", &loaded, started)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CzCheck { out, extinction_db } => {
            let report = gates::cz_report()?;
            let body = output::gate_report_json(&report);
            match &out {
                Some(path) => std::fs::write(path, &body)?,
                None => print!("{body}"),
            }
            eprintln!(
                "cz-check: fidelity = {:.10}, success = [{:.6}, {:.6}, {:.6}, {:.6}], |++> concurrence = {:.6}",
                report.fidelity,
                report.success_probabilities[0],
                report.success_probabilities[1],
                report.success_probabilities[2],
                report.success_probabilities[3],
                report.plus_plus_concurrence
            );
            if let Some(db) = extinction_db {
                let perturbed = perturbed_cz_fidelity(db)?;
                eprintln!(
                    "cz-check: fidelity at {db} dB extinction = {perturbed:.6} (reported, not asserted)"
                );
            }
            let contract_ok = report.fidelity > 1.0 - 1e-9
                && report
                    .success_probabilities
                    .iter()
                    .all(|p| (p - 1.0 / 9.0).abs() < 1e-9);
            if contract_ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(CliError {
                    code: EXIT_GATE,
                    message: format!(
                        "gate contract violated: fidelity {:.12}, success {:?}",
                        report.fidelity, report.success_probabilities
                    ),
                })
            }
        }
    }
}

/// Fidelity of the CZ construction when the central switch has a finite
/// extinction ratio.
fn perturbed_cz_fidelity(extinction_db: f64) -> Result<f64, CliError> {
    use num_complex::Complex64;
    use tbsim_core::elements::{apply_switch, attenuator, SwitchSchedule};
    use tbsim_core::fock::{tensor, Mode, Occupation, Port, PureState};

    let schedule = SwitchSchedule::with_imperfections(
        [(1, 2.0 * (1.0 / 3f64.sqrt()).acos()), (2, 0.0)],
        extinction_db,
        0.0,
    );
    let tau = 1.0 / 3f64.sqrt();
    let basis = |port: Port, bin: u8| PureState::basis(Occupation::single(Mode::new(port, bin)));
    let outputs: Vec<Occupation> = [(2u8, 2u8), (2, 1), (1, 2), (1, 1)]
        .iter()
        .map(|&(cb, db)| {
            Occupation::from_counts([(Mode::new(Port::C, cb), 1), (Mode::new(Port::D, db), 1)])
        })
        .collect();
    let mut operator = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (col, &(qa, qb)) in [(2u8, 2u8), (2, 1), (1, 2), (1, 1)].iter().enumerate() {
        let input = tensor(&basis(Port::A, qa), &basis(Port::B, qb))?;
        let mut state = apply_switch(&input, &schedule, (Port::A, Port::B), (Port::C, Port::D))?;
        state = attenuator(&state, Port::C, 2, tau)?;
        state = attenuator(&state, Port::D, 2, tau)?;
        for (row, occ) in outputs.iter().enumerate() {
            operator[row][col] = state.amplitude(occ);
        }
    }
    let cz = [1.0, 1.0, 1.0, -1.0];
    let mut trace = Complex64::new(0.0, 0.0);
    let mut gram = 0.0;
    for row in 0..4 {
        for col in 0..4 {
            gram += operator[row][col].norm_sqr();
            if row == col {
                trace += Complex64::new(cz[row], 0.0) * operator[row][col];
            }
        }
    }
    Ok(trace.norm_sqr() / (gram * 4.0))
}
