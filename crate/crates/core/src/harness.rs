//! Experiment runner and file interfaces: seeded rejection-rate studies
//! over an `h` grid, deterministic reports, and numeric CSV ingestion.
//!
//! Reports are deterministic in `(spec, seed)` regardless of thread count:
//! replications fan out over a worker pool with per-replication derived
//! seeds and are aggregated in index order; wall-clock timings live in a
//! separate metadata block so report bytes stay comparable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::datagen::scenario_from_name;
use crate::rng::derive_seed;
use crate::testing::{run_test, TestConfig, Variant};
use crate::{Error, Result};

fn default_c() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    0.05
}
fn default_variant() -> String {
    "tiers".into()
}
fn default_draws() -> usize {
    2000
}
fn default_mu_scale() -> f64 {
    1.0
}

/// A rejection-probability study: scenario, scale, deviation grid,
/// repetitions. Mirrors the flat key-value config file accepted by the
/// CLI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Scenario name (see the datagen registry): `sl`, `sh`, `dl`, `dh`,
    /// `ggm-sb-so`, `ggm-db-so`, `ggm-sb-do`, `ggm-db-do`.
    pub regime: String,
    /// Variance ratio of the regression designs (ignored by GGM regimes).
    #[serde(default = "default_c")]
    pub c: f64,
    pub n: usize,
    pub p: usize,
    pub h_grid: Vec<f64>,
    pub reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// `tiers` or `tiers-plus`.
    #[serde(default = "default_variant")]
    pub variant: String,
    pub seed: u64,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_mu_scale")]
    pub mu_scale: f64,
    #[serde(default)]
    pub weighted_qhat: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        scenario_from_name(&self.regime, self.c)?;
        Variant::from_name(&self.variant)?;
        if self.reps < 1 {
            return Err(Error::InvalidArgument("need at least one repetition".into()));
        }
        if self.h_grid.is_empty() {
            return Err(Error::InvalidArgument("empty h grid".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must be in (0,1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// Desk preset: minutes on a workstation.
    pub fn apply_desk_preset(&mut self) {
        self.n = 100;
        self.p = 150;
        self.reps = 200;
    }

    /// Reference scale of the published tables: hours, not for CI.
    pub fn apply_paper_preset(&mut self) {
        self.n = 200;
        self.p = 500;
        self.reps = 100;
    }
}

/// One row of the report: rejection counts at a single deviation `h`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectionRow {
    pub h: f64,
    pub rejections: usize,
    pub failures: usize,
    pub reps: usize,
    /// `rejections / reps`.
    pub rate: f64,
    /// Binomial standard error `sqrt(rate (1 - rate) / reps)`.
    pub se: f64,
}

/// Deterministic experiment outcome (no timestamps or timings here).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub rows: Vec<RejectionRow>,
    pub version: String,
    /// SHA-256 of the canonical JSON spec.
    pub config_hash: String,
    /// How per-replication seeds derive from the experiment seed.
    pub rep_seed_rule: String,
}

impl ExperimentReport {
    /// Canonical JSON bytes; identical for identical `(spec, seed)`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV mirror of the table layout.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("h,rate,se,rejections,failures,reps\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.h, r.rate, r.se, r.rejections, r.failures, r.reps
            );
        }
        out
    }
}

/// Non-deterministic run facts, kept out of the report bytes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMetadata {
    pub wall_clock_s: f64,
    pub mean_rep_wall_clock_s: f64,
    pub threads: usize,
}

fn config_hash(spec: &ExperimentSpec) -> String {
    let bytes = serde_json::to_vec(spec).expect("spec serializes");
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

/// Runs every `(h, rep)` cell of the study and aggregates rejection
/// counts. A replication that errors is recorded in the failure column;
/// the run aborts only when more than 20% of a row's replications fail.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(ExperimentReport, RunMetadata)> {
    spec.validate()?;
    let scenario = scenario_from_name(&spec.regime, spec.c)?;
    let variant = Variant::from_name(&spec.variant)?;
    let started = Instant::now();

    let cells: Vec<(usize, usize)> = (0..spec.h_grid.len())
        .flat_map(|hi| (0..spec.reps).map(move |rep| (hi, rep)))
        .collect();
    let outcomes: Vec<(usize, std::result::Result<bool, String>)> = cells
        .par_iter()
        .map(|&(hi, rep)| {
            let rep_seed = derive_seed(spec.seed, ((hi as u64) << 32) | rep as u64);
            let run = || -> Result<bool> {
                let (data, _truth) = scenario.generate(spec.n, spec.p, spec.h_grid[hi], rep_seed)?;
                let cfg = TestConfig {
                    draws: spec.draws,
                    seed: rep_seed,
                    eta: None,
                    mu_scale: spec.mu_scale,
                    weighted_qhat: spec.weighted_qhat,
                };
                Ok(run_test(&data, spec.alpha, &cfg, variant)?.reject)
            };
            (hi, run().map_err(|e| e.to_string()))
        })
        .collect();

    let mut rows: Vec<RejectionRow> = spec
        .h_grid
        .iter()
        .map(|&h| RejectionRow { h, rejections: 0, failures: 0, reps: spec.reps, rate: 0.0, se: 0.0 })
        .collect();
    for (hi, outcome) in outcomes {
        match outcome {
            Ok(true) => rows[hi].rejections += 1,
            Ok(false) => {}
            Err(_) => rows[hi].failures += 1,
        }
    }
    for row in &mut rows {
        if row.failures * 5 > spec.reps {
            return Err(Error::Experiment(format!(
                "{} of {} replications failed at h={}",
                row.failures, spec.reps, row.h
            )));
        }
        row.rate = row.rejections as f64 / row.reps as f64;
        row.se = (row.rate * (1.0 - row.rate) / row.reps as f64).sqrt();
    }

    let wall = started.elapsed().as_secs_f64();
    let report = ExperimentReport {
        spec: spec.clone(),
        rows,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(spec),
        rep_seed_rule: "chacha8(seed, rep_base ^ (h_index << 32 | rep)).next_u64()".into(),
    };
    let meta = RunMetadata {
        wall_clock_s: wall,
        mean_rep_wall_clock_s: wall / cells.len() as f64,
        threads: rayon::current_num_threads(),
    };
    Ok((report, meta))
}

// --- numeric CSV interface -------------------------------------------------

fn csv_error(path: &Path, line: usize, col: usize, detail: impl Into<String>) -> Error {
    Error::Csv { path: path.display().to_string(), line, col, detail: detail.into() }
}

/// Parses a dense numeric CSV: one row per observation, optional header
/// (auto-detected when the first row fails to parse as numbers), finite
/// decimal-point floats only. Errors carry 1-based line/column
/// coordinates.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    let mut first_data_line = true;
    for (lineno, line) in text.lines().enumerate() {
        let line_num = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: std::result::Result<Vec<f64>, (usize, String)> = cells
            .iter()
            .enumerate()
            .map(|(ci, cell)| {
                cell.parse::<f64>().map_err(|_| (ci + 1, format!("not a number: '{cell}'")))
            })
            .collect();
        match parsed {
            Err((col, detail)) => {
                if first_data_line {
                    // Header row.
                    first_data_line = false;
                    continue;
                }
                return Err(csv_error(path, line_num, col, detail));
            }
            Ok(values) => {
                first_data_line = false;
                if let Some((ci, v)) =
                    values.iter().enumerate().find(|(_, v)| !v.is_finite())
                {
                    return Err(csv_error(path, line_num, ci + 1, format!("non-finite value {v}")));
                }
                match width {
                    None => width = Some(values.len()),
                    Some(w) if w != values.len() => {
                        return Err(csv_error(
                            path,
                            line_num,
                            values.len(),
                            format!("expected {w} columns, got {}", values.len()),
                        ));
                    }
                    _ => {}
                }
                rows.push(values);
            }
        }
    }
    let width = width.ok_or_else(|| csv_error(path, 1, 1, "no numeric rows"))?;
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), width), flat).map_err(|e| {
        Error::InvalidArgument(format!("csv shape error on {}: {e}", path.display()))
    })
}

/// Reads a single-column (or single-row) CSV as a vector.
pub fn read_vector_csv(path: &Path) -> Result<Array1<f64>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() == 1 {
        Ok(m.column(0).to_owned())
    } else if m.nrows() == 1 {
        Ok(m.row(0).to_owned())
    } else {
        Err(Error::InvalidArgument(format!(
            "{} is {}x{}, expected a vector",
            path.display(),
            m.nrows(),
            m.ncols()
        )))
    }
}

/// Writes a matrix as bare numeric CSV (shortest round-trip float form).
pub fn write_matrix_csv(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut out = String::new();
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

/// Writes a vector as a single-column CSV.
pub fn write_vector_csv(path: &Path, v: &Array1<f64>) -> Result<()> {
    let mut out = String::new();
    for x in v {
        let _ = writeln!(out, "{x}");
    }
    fs::write(path, out).map_err(|e| Error::Io { path: path.display().to_string(), source: e })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> ExperimentSpec {
        ExperimentSpec {
            regime: "sl".into(),
            c: 2.0,
            n: 30,
            p: 20,
            h_grid: vec![0.0],
            reps: 4,
            alpha: 0.05,
            variant: "tiers".into(),
            seed: 9,
            draws: 1000,
            mu_scale: 1.0,
            weighted_qhat: false,
        }
    }

    #[test]
    fn experiment_report_is_reproducible() {
        let spec = tiny_spec();
        let (r1, _) = run_experiment(&spec).unwrap();
        let (r2, _) = run_experiment(&spec).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        assert_eq!(r1.rows[0].reps, 4);
        assert_eq!(
            r1.rows[0].rate,
            r1.rows[0].rejections as f64 / r1.rows[0].reps as f64
        );
    }

    #[test]
    fn spec_validation_catches_bad_fields() {
        let mut spec = tiny_spec();
        spec.regime = "zzz".into();
        assert!(spec.validate().is_err());
        let mut spec = tiny_spec();
        spec.h_grid.clear();
        assert!(spec.validate().is_err());
        let mut spec = tiny_spec();
        spec.variant = "nope".into();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn csv_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = ndarray::array![[1.5, -2.25], [0.1, 3e-7]];
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn csv_header_autodetected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        fs::write(&path, "x1,x2\n1.0,2.0\n3.0,4.0\n").unwrap();
        let m = read_matrix_csv(&path).unwrap();
        assert_eq!(m.nrows(), 2);
        assert_eq!(m[(1, 1)], 4.0);
    }

    #[test]
    fn csv_reports_bad_cell_coordinates() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "1.0,2.0\n3.0,oops\n").unwrap();
        match read_matrix_csv(&path) {
            Err(Error::Csv { line, col, .. }) => {
                assert_eq!((line, col), (2, 2));
            }
            other => panic!("expected csv error, got {other:?}"),
        }
        let path2 = dir.path().join("nan.csv");
        fs::write(&path2, "1.0\nNaN\n").unwrap();
        match read_matrix_csv(&path2) {
            Err(Error::Csv { line, col, .. }) => assert_eq!((line, col), (2, 1)),
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn large_csv_roundtrip() {
        use crate::rng::NormalSource;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.csv");
        let mut src = NormalSource::from_stream(4, 0);
        let m = Array2::from_shape_fn((1000, 50), |_| src.next());
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(m, back);
    }
}
