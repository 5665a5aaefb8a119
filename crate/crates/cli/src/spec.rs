//! Experiment specification: per-command defaults, overlaid by an optional
//! TOML file, overlaid by command-line flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use facerot::exec::Execution;
use facerot::lattice::MIN_SIDE;
use serde::{Deserialize, Serialize};

use crate::registry::{self, FieldSource};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Verify,
    Simulate,
    HydroCompare,
    CurrentCompare,
    Einstein,
    Hodge,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub n: usize,
    pub alpha: f64,
    /// Final time; comparisons also run at each entry of `times`.
    pub t: f64,
    pub times: Vec<f64>,
    pub ensemble: usize,
    pub seed: u64,
    pub profile: String,
    pub field: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Coarse lattice for the refinement comparison.
    pub coarse_n: usize,
    pub martingale_n: Vec<usize>,
    /// Grid side of the continuum solvers.
    pub grid: usize,
    pub zmax: i32,
    /// Sobolev order of the dual norm.
    pub k: f64,
    /// Absolute tolerance floor of the hydrodynamic comparisons.
    pub floor: f64,
    /// Relative tolerance floor of the linear-response comparison.
    pub relative_floor: f64,
    pub martingale_slack: f64,
    /// Amplitude of the potential driving the stationary-profile check.
    pub logit_amplitude: f64,
    pub logit_time: f64,
    pub hodge_sizes: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSection {
    pub exact_n4: bool,
    pub mutate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub version: u32,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub execution: Execution,
    pub sim: SimSection,
    pub analysis: AnalysisSection,
    pub checks: CheckSection,
}

impl ExperimentSpec {
    pub fn defaults(command: Command) -> Self {
        let mut sim = SimSection {
            n: 64,
            alpha: 0.5,
            t: 0.05,
            times: vec![0.02],
            ensemble: 100,
            seed: 1,
            profile: "sine".into(),
            field: "none".into(),
        };
        match command {
            Command::Simulate => {
                sim.n = 32;
                sim.ensemble = 10;
            }
            Command::Einstein => {
                sim.n = 32;
                sim.t = 0.2;
                sim.times = Vec::new();
                sim.profile = "flat:0.3".into();
                sim.field = "const:0.5,0".into();
            }
            _ => {}
        }
        Self {
            version: SCHEMA_VERSION,
            command,
            out: None,
            execution: Execution::default(),
            sim,
            analysis: AnalysisSection {
                coarse_n: 16,
                martingale_n: vec![16, 32],
                grid: 64,
                zmax: 2,
                k: 3.0,
                floor: 0.01,
                relative_floor: 0.1,
                martingale_slack: 1.5,
                logit_amplitude: 0.1,
                logit_time: 1.0,
                hodge_sizes: (3..=8).collect(),
            },
            checks: CheckSection::default(),
        }
    }

    /// Defaults for the file's command with the file's keys laid on top.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        let command = file
            .get("command")
            .context("config is missing `command`")?
            .clone()
            .try_into::<Command>()
            .context("config field `command`")?;
        let mut merged = toml::Table::try_from(Self::defaults(command))?;
        merge(&mut merged, file);
        let spec: Self = toml::Value::Table(merged).try_into().context("invalid config")?;
        if spec.version != SCHEMA_VERSION {
            bail!(
                "config field `version`: expected {SCHEMA_VERSION}, found {}",
                spec.version
            );
        }
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Sorted comparison times, always ending at `t`.
    pub fn times(&self) -> Vec<f64> {
        let mut ts = self.sim.times.clone();
        ts.push(self.sim.t);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    pub fn field(&self) -> Result<FieldSource> {
        FieldSource::parse(&self.sim.field).context("config field `sim.field`")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sim;
        ensure!(s.n >= MIN_SIDE, "config field `sim.n`: must be at least {MIN_SIDE}");
        ensure!(s.alpha.abs() < 1.0, "config field `sim.alpha`: need |alpha| < 1");
        ensure!(s.t.is_finite() && s.t > 0.0, "config field `sim.t`: must be positive");
        ensure!(
            s.times.iter().all(|&x| x > 0.0 && x <= s.t),
            "config field `sim.times`: entries must lie in (0, t]"
        );
        ensure!(
            s.ensemble >= 2,
            "config field `sim.ensemble`: need at least 2 trajectories"
        );
        registry::profile(&s.profile).context("config field `sim.profile`")?;
        self.field()?;
        let a = &self.analysis;
        ensure!(
            a.coarse_n >= MIN_SIDE,
            "config field `analysis.coarse_n`: must be at least {MIN_SIDE}"
        );
        ensure!(
            a.martingale_n.iter().all(|&n| n >= MIN_SIDE),
            "config field `analysis.martingale_n`: sides must be at least {MIN_SIDE}"
        );
        ensure!(
            a.hodge_sizes.iter().all(|&n| n >= MIN_SIDE),
            "config field `analysis.hodge_sizes`: sides must be at least {MIN_SIDE}"
        );
        ensure!(a.grid >= 8, "config field `analysis.grid`: must be at least 8");
        ensure!(a.zmax >= 0, "config field `analysis.zmax`: must be non-negative");
        ensure!(a.k > 2.0, "config field `analysis.k`: must exceed 2");
        ensure!(
            a.logit_time > 0.0,
            "config field `analysis.logit_time`: must be positive"
        );
        Ok(())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for c in [
            Command::Verify,
            Command::Simulate,
            Command::HydroCompare,
            Command::CurrentCompare,
            Command::Einstein,
            Command::Hodge,
        ] {
            let mut s = ExperimentSpec::defaults(c);
            s.out = Some("runs/x".into());
            s.sim.alpha = -0.3;
            let text = s.to_toml().unwrap();
            assert_eq!(ExperimentSpec::from_toml(&text).unwrap(), s);
        }
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let s = ExperimentSpec::from_toml("version = 1\ncommand = \"einstein\"\n[sim]\nn = 16\n").unwrap();
        assert_eq!(s.sim.n, 16);
        assert_eq!(s.sim.t, 0.2);
        assert_eq!(s.sim.profile, "flat:0.3");
    }

    #[test]
    fn bad_files_name_the_field() {
        let e = ExperimentSpec::from_toml("version = 1\ncommand = \"simulate\"\n[sim]\nnn = 3\n").unwrap_err();
        assert!(format!("{e:#}").contains("nn"), "{e:#}");
        let e = ExperimentSpec::from_toml("version = 2\ncommand = \"simulate\"\n").unwrap_err();
        assert!(format!("{e:#}").contains("version"));
        assert!(ExperimentSpec::from_toml("[sim]\nn = 3\n").is_err());
        let mut s = ExperimentSpec::defaults(Command::Simulate);
        s.sim.profile = "wobbly".into();
        assert!(format!("{:#}", s.validate().unwrap_err()).contains("sim.profile"));
    }

    #[test]
    fn times_end_at_horizon() {
        let s = ExperimentSpec::defaults(Command::HydroCompare);
        assert_eq!(s.times(), vec![0.02, 0.05]);
        assert!(s.validate().is_ok());
    }
}
