//! Run artifacts: manifest, comparison and check tables, per-trajectory
//! pairings and a machine-readable summary. All files are written from one
//! thread after the computation, so their content is deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use facerot::exact::CheckReport;
use facerot::sim::RNG_NAME;
use serde::Serialize;

use crate::experiments::{Outcome, RunInfo};
use crate::spec::ExperimentSpec;

#[derive(Serialize)]
struct Manifest<'a> {
    tool_version: &'a str,
    spec: &'a ExperimentSpec,
    rng: &'a str,
    runs: &'a [RunInfo],
    field_registry: &'a BTreeMap<String, String>,
    wall_time_secs: f64,
    /// False until every artifact has been written.
    complete: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    passed: bool,
    rows: usize,
    rows_failed: usize,
    checks: Vec<CheckSummary<'a>>,
    notes: &'a [String],
}

#[derive(Serialize)]
struct CheckSummary<'a> {
    name: &'a str,
    passed: bool,
    max_violation: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct PairingRecord<'a> {
    run: &'a str,
    trajectory: usize,
    time: f64,
    field_id: &'a str,
    value: f64,
}

pub struct OutputDir {
    dir: PathBuf,
}

impl OutputDir {
    /// Creates the directory and marks it as holding an incomplete run.
    pub fn create(dir: &Path, spec: &ExperimentSpec) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let out = Self { dir: dir.to_path_buf() };
        out.write_manifest(spec, &Outcome::default(), 0.0, false)
            .with_context(|| format!("output directory {} is not writable", dir.display()))?;
        Ok(out)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn write_manifest(&self, spec: &ExperimentSpec, outcome: &Outcome, wall: f64, complete: bool) -> Result<()> {
        let m = Manifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            spec,
            rng: RNG_NAME,
            runs: &outcome.runs,
            field_registry: &outcome.registry,
            wall_time_secs: wall,
            complete,
        };
        fs::write(self.path("manifest.json"), serde_json::to_string_pretty(&m)?)?;
        Ok(())
    }

    fn write_csv<T: Serialize>(&self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write(&self, spec: &ExperimentSpec, outcome: &Outcome, wall: f64) -> Result<()> {
        fs::write(self.path("spec.toml"), spec.to_toml()?)?;
        if !outcome.rows.is_empty() {
            self.write_csv("comparisons.csv", &outcome.rows)?;
        }
        if !outcome.checks.is_empty() {
            self.write_csv("checks.csv", &outcome.checks)?;
        }
        if !outcome.ensembles.is_empty() {
            let records = outcome.ensembles.iter().flat_map(|e| {
                e.values.iter().enumerate().flat_map(move |(k, traj)| {
                    traj.iter().zip(&e.times).flat_map(move |(vals, &time)| {
                        vals.iter().zip(&e.ids).map(move |(&value, id)| PairingRecord {
                            run: &e.label,
                            trajectory: k,
                            time,
                            field_id: id,
                            value,
                        })
                    })
                })
            });
            self.write_csv("pairings.csv", records)?;
        }
        for a in &outcome.artifacts {
            fs::write(self.path(&a.name), &a.contents)?;
        }
        let summary = Summary {
            command: &format!("{:?}", spec.command),
            passed: outcome.passed(),
            rows: outcome.rows.len(),
            rows_failed: outcome.rows.iter().filter(|r| !r.passed).count(),
            checks: outcome.checks.iter().map(check_summary).collect(),
            notes: &outcome.notes,
        };
        fs::write(self.path("summary.json"), serde_json::to_string_pretty(&summary)?)?;
        self.write_manifest(spec, outcome, wall, true)
    }
}

fn check_summary(c: &CheckReport) -> CheckSummary<'_> {
    CheckSummary {
        name: &c.name,
        passed: c.passed,
        max_violation: c.max_violation,
        tolerance: c.tolerance,
    }
}
