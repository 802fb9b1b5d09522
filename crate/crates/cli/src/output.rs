//! CSV documents and the run manifest. Output bytes are a pure function of
//! (config, seed, workers), so reruns are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use tbsim_core::detection::{estimate_accidentals, subtracted_coincidences};
use tbsim_core::experiments::ScanResult;
use tbsim_core::gates::GateReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `#`-prefixed metadata lines shared by every CSV.
pub fn metadata(command: &str, config_hash: u64, seed: u64, workers: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# tbsim {VERSION}");
    let _ = writeln!(s, "# command: {command}");
    let _ = writeln!(s, "# config-hash: {config_hash:016x}");
    let _ = writeln!(s, "# seed: {seed}");
    let _ = writeln!(s, "# workers: {workers}");
    s
}

/// CSV for delay-type scans (HOM dip and bunching traces).
pub fn delay_csv(meta: &str, scan: &ScanResult) -> String {
    let mut s = String::from(meta);
    let _ = writeln!(s, "delay_ps,coincidences,singles_c,singles_d,rate,rate_stderr");
    for point in &scan.points {
        let rec = point.record.as_ref().expect("sampled scan");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            point.setting,
            rec.coincidences,
            rec.singles_c,
            rec.singles_d,
            rec.rate(),
            rec.rate_stderr()
        );
    }
    s
}

/// CSV for fringe scans.
pub fn fringe_csv(meta: &str, scan: &ScanResult) -> String {
    let mut s = String::from(meta);
    let _ = writeln!(s, "phi_c,coincidences,accidentals,subtracted,singles_c");
    for point in &scan.points {
        let rec = point.record.as_ref().expect("sampled scan");
        let accidentals = estimate_accidentals(rec).unwrap_or(0.0);
        let subtracted = subtracted_coincidences(rec).unwrap_or(0.0);
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            point.setting, rec.coincidences, accidentals, subtracted, rec.singles_c
        );
    }
    s
}

/// Gate report as a JSON document: operator entries as [re, im] pairs.
pub fn gate_report_json(report: &GateReport) -> String {
    let operator: Vec<Vec<[f64; 2]>> = report
        .operator
        .iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    let doc = serde_json::json!({
        "tool_version": VERSION,
        "basis": ["t2t2", "t2t1", "t1t2", "t1t1"],
        "operator": operator,
        "success_probabilities": report.success_probabilities,
        "fidelity": report.fidelity,
        "max_off_diagonal": report.max_off_diagonal,
        "plus_plus_concurrence": report.plus_plus_concurrence,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable report");
    text.push('\n');
    text
}

/// Reproducibility sidecar written next to `--out` files.
#[derive(Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub config: String,
    pub seed: u64,
    pub workers: usize,
    pub pulses: u64,
    pub outputs: Vec<PathBuf>,
    pub duration_ms: u128,
}

impl RunManifest {
    pub fn new(
        command: &str,
        config_hash: u64,
        config: String,
        seed: u64,
        workers: usize,
        pulses: u64,
        out: &Path,
        elapsed: Duration,
    ) -> Self {
        RunManifest {
            tool_version: VERSION.to_string(),
            command: command.to_string(),
            config_hash: format!("{config_hash:016x}"),
            config,
            seed,
            workers,
            pulses,
            outputs: vec![out.to_path_buf()],
            duration_ms: elapsed.as_millis(),
        }
    }

    pub fn write_beside(&self, out: &Path) -> std::io::Result<PathBuf> {
        let path = PathBuf::from(format!("{}.manifest.json", out.display()));
        let mut body = serde_json::to_string_pretty(self).expect("serializable manifest");
        body.push('\n');
        std::fs::write(&path, body)?;
        Ok(path)
    }
}
