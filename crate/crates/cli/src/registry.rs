//! Named initial profiles, external fields and test functions.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use facerot::continuum::{FourierField, ScalarSeries, Trig};
use facerot::fields::{discretize_field, DiscreteVectorField};
use facerot::io::read_field_csv;
use facerot::lattice::Torus;
use facerot::sim::{SimConfig, Simulator};

pub const PROFILE_NAMES: &str = "sine, sine2, flat:<rho>";
pub const FIELD_NAMES: &str = "none, const:<e1>,<e2>, grad-sin:<amp>, or a path to a field CSV";

/// Initial density profile by name.
pub fn profile(name: &str) -> Result<ScalarSeries> {
    let p = match name {
        "sine" => ScalarSeries::constant(0.5).with_wave(0.25, [1, 0], Trig::Sin),
        "sine2" => ScalarSeries::constant(0.5)
            .with_wave(0.2, [1, 0], Trig::Sin)
            .with_wave(0.1, [1, 1], Trig::Cos),
        _ => match name.strip_prefix("flat:") {
            Some(rho) => {
                let rho: f64 = rho.parse().with_context(|| format!("profile `{name}`: bad density"))?;
                if !(0.0..=1.0).contains(&rho) {
                    bail!("profile `{name}`: density must lie in [0, 1]");
                }
                ScalarSeries::constant(rho)
            }
            None => bail!("unknown profile `{name}` (expected {PROFILE_NAMES})"),
        },
    };
    Ok(p)
}

/// The external field `H`, either smooth or already discretized on disk.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldSource {
    None,
    Smooth(FourierField),
    File(PathBuf),
}

impl FieldSource {
    pub fn parse(name: &str) -> Result<Self> {
        if name == "none" {
            return Ok(Self::None);
        }
        if let Some(rest) = name.strip_prefix("const:") {
            let parts: Vec<f64> = rest
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("field `{name}`: expected const:<e1>,<e2>"))?;
            let [e1, e2] = parts[..] else {
                bail!("field `{name}`: expected two components");
            };
            return Ok(Self::Smooth(FourierField::constant([e1, e2])));
        }
        if let Some(rest) = name.strip_prefix("grad-sin:") {
            let amp: f64 = rest.parse().with_context(|| format!("field `{name}`: bad amplitude"))?;
            return Ok(Self::Smooth(FourierField::gradient_of(&gradient_potential(amp))));
        }
        let path = Path::new(name);
        if path.exists() {
            return Ok(Self::File(path.to_path_buf()));
        }
        bail!("unknown field `{name}` (expected {FIELD_NAMES})")
    }

    pub fn smooth(&self) -> Option<&FourierField> {
        match self {
            Self::Smooth(h) => Some(h),
            _ => None,
        }
    }

    pub fn discrete(&self, torus: &Torus) -> Result<Option<DiscreteVectorField>> {
        Ok(match self {
            Self::None => None,
            Self::Smooth(h) => Some(discretize_field(h, torus)),
            Self::File(p) => {
                let f = File::open(p).with_context(|| format!("opening field file {}", p.display()))?;
                Some(read_field_csv(BufReader::new(f), torus).with_context(|| format!("reading {}", p.display()))?)
            }
        })
    }
}

/// Potential `amp * sin(2 pi (u1 + u2))` used by the `grad-sin` field.
pub fn gradient_potential(amp: f64) -> ScalarSeries {
    ScalarSeries::default().with_wave(amp, [1, 1], Trig::Sin)
}

pub fn simulator(mut cfg: SimConfig, field: &FieldSource) -> Result<Simulator> {
    match field {
        FieldSource::None => Ok(Simulator::new(cfg)?),
        FieldSource::Smooth(h) => {
            cfg.field = Some(h.clone());
            Ok(Simulator::new(cfg)?)
        }
        FieldSource::File(_) => {
            let torus = Torus::new(cfg.n)?;
            let h = field.discrete(&torus)?.expect("file source yields a field");
            Ok(Simulator::with_discrete_field(cfg, h)?)
        }
    }
}

#[derive(Clone, Debug)]
pub struct TestFunction {
    pub id: &'static str,
    pub formula: &'static str,
    pub series: ScalarSeries,
}

#[derive(Clone, Debug)]
pub struct TestField {
    pub id: &'static str,
    pub formula: &'static str,
    pub field: FourierField,
}

fn wave(k: [i32; 2], trig: Trig) -> ScalarSeries {
    ScalarSeries::default().with_wave(1.0, k, trig)
}

/// Scalar test functions for the empirical density.
pub fn density_tests() -> Vec<TestFunction> {
    vec![
        TestFunction {
            id: "f1",
            formula: "sin(2 pi u1)",
            series: wave([1, 0], Trig::Sin),
        },
        TestFunction {
            id: "f2",
            formula: "cos(2 pi u1)",
            series: wave([1, 0], Trig::Cos),
        },
        TestFunction {
            id: "f3",
            formula: "sin(2 pi u2)",
            series: wave([0, 1], Trig::Sin),
        },
        TestFunction {
            id: "f4",
            formula: "sin(4 pi u1)",
            series: wave([2, 0], Trig::Sin),
        },
        TestFunction {
            id: "f5",
            formula: "cos(2 pi (u1 + u2))",
            series: wave([1, 1], Trig::Cos),
        },
    ]
}

/// Vector test fields for the integrated current.
pub fn current_tests() -> Vec<TestField> {
    let zero = ScalarSeries::default;
    vec![
        TestField {
            id: "Ga",
            formula: "(0, sin(2 pi u1))",
            field: FourierField::new(zero(), wave([1, 0], Trig::Sin)),
        },
        TestField {
            id: "Gb",
            formula: "(0, sin(4 pi u1))",
            field: FourierField::new(zero(), wave([2, 0], Trig::Sin)),
        },
        TestField {
            id: "Gc",
            formula: "(cos(2 pi u1), 0)",
            field: FourierField::new(wave([1, 0], Trig::Cos), zero()),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles() {
        assert_eq!(profile("flat:0.3").unwrap(), ScalarSeries::constant(0.3));
        assert!(profile("flat:1.5").is_err());
        assert!(profile("flat:x").is_err());
        assert!(profile("nope").is_err());
        let s = profile("sine").unwrap();
        assert!((s.value([0.25, 0.0]) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn fields() {
        assert_eq!(FieldSource::parse("none").unwrap(), FieldSource::None);
        assert_eq!(
            FieldSource::parse("const:0.5,0").unwrap(),
            FieldSource::Smooth(FourierField::constant([0.5, 0.0]))
        );
        assert!(FieldSource::parse("const:1").is_err());
        assert!(FieldSource::parse("/definitely/not/here.csv").is_err());
        assert!(FieldSource::parse("grad-sin:0.1").unwrap().smooth().is_some());
    }
}
