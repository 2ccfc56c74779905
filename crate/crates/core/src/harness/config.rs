//! Scenario files.
//!
//! Scenarios are TOML documents. Units are SI and spelled out in the key
//! names. A minimal planar file:
//!
//! ```toml
//! name = "demo"
//! dimensions = 2
//! reflection_seed = 1
//!
//! [radar]
//! carrier_frequency_hz = 3.0e8
//! propagation_speed_mps = 3.0e8
//! snapshot_interval_s = 0.01
//! snapshot_count = 50
//! energy_ratio = 1.0          # sqrt(E/M)
//!
//! [pulses]                    # optional, only used by the Doppler check
//! prt_s = 1.25e-3
//! pulses_per_cit = 8
//!
//! [geometry]
//! transmitters = [[0.0, 0.0], [4000.0, 0.0]]
//! receivers = [[0.0, 0.0], [2000.0, 0.0], [0.0, 2000.0]]
//!
//! [motion]                    # [position, velocity, acceleration, ...]
//! x = [8400.0, 40.0]
//! y = [9800.0, -50.0]
//! ```
//!
//! With `dimensions = 3` every antenna has three coordinates and `motion.z`
//! is required. The polynomial order is the common length of the motion
//! arrays minus one.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{AntennaGeometry, Axis, MotionCoefficients, Position3, PulseSchedule, RadarParams, Scenario};

const EXAMPLE1: &str = include_str!("../../presets/example1.toml");
const EXAMPLE2: &str = include_str!("../../presets/example2.toml");

/// Names accepted by [`load_scenario`] in place of a path.
pub const PRESETS: [&str; 2] = ["example1", "example2"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub dimensions: u8,
    pub reflection_seed: u64,
    pub radar: RadarSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulses: Option<PulseSection>,
    pub geometry: GeometrySection,
    pub motion: MotionSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    pub carrier_frequency_hz: f64,
    pub propagation_speed_mps: f64,
    pub snapshot_interval_s: f64,
    pub snapshot_count: usize,
    pub energy_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    pub prt_s: f64,
    pub pulses_per_cit: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub transmitters: Vec<Vec<f64>>,
    pub receivers: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSection {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<f64>>,
}

fn config_error(path: &str, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        message: message.into(),
    }
}

fn positions(list: &[Vec<f64>], dims: usize, key: &str) -> Result<Vec<Position3>> {
    list.iter()
        .enumerate()
        .map(|(i, p)| {
            if p.len() != dims {
                return Err(config_error(
                    &format!("{key}[{i}]"),
                    format!("expected {dims} coordinates, got {}", p.len()),
                ));
            }
            Ok(Position3::new(p[0], p[1], if dims == 3 { p[2] } else { 0.0 }))
        })
        .collect()
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::de::Deserializer::parse(text).map_err(|e| config_error("", e.message()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(&path, e.into_inner().message())
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_error("", e.to_string()))
    }

    /// Validates the document and builds the scenario it describes.
    pub fn to_scenario(&self) -> Result<Scenario> {
        let dims = match self.dimensions {
            2 | 3 => self.dimensions as usize,
            d => return Err(config_error("dimensions", format!("must be 2 or 3, got {d}"))),
        };
        let tx = positions(&self.geometry.transmitters, dims, "geometry.transmitters")?;
        let rx = positions(&self.geometry.receivers, dims, "geometry.receivers")?;
        let geometry = AntennaGeometry::new(tx, rx)?;
        let r = &self.radar;
        let params = RadarParams::new(
            r.carrier_frequency_hz,
            r.propagation_speed_mps,
            r.snapshot_interval_s,
            r.snapshot_count,
            r.energy_ratio,
        )?;
        let m = &self.motion;
        let truth = match (dims, &m.z) {
            (2, None) => MotionCoefficients::planar(m.x.clone(), m.y.clone())?,
            (2, Some(_)) => return Err(config_error("motion.z", "not allowed when dimensions = 2")),
            (3, Some(z)) => MotionCoefficients::new(m.x.clone(), m.y.clone(), z.clone())?,
            _ => return Err(config_error("motion.z", "missing field `z` (required when dimensions = 3)")),
        };
        let scenario = Scenario {
            name: self.name.clone(),
            geometry,
            params,
            truth,
            pulses: self.pulses.as_ref().map(|p| PulseSchedule {
                prt: p.prt_s,
                pulses_per_cit: p.pulses_per_cit,
            }),
            reflection_seed: self.reflection_seed,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_scenario(s: &Scenario) -> Self {
        let dims = if s.truth.is_planar() { 2 } else { 3 };
        let coords = |p: &Position3| {
            let mut v = vec![p.x, p.y, p.z];
            v.truncate(dims);
            v
        };
        Self {
            name: s.name.clone(),
            dimensions: dims as u8,
            reflection_seed: s.reflection_seed,
            radar: RadarSection {
                carrier_frequency_hz: s.params.carrier_frequency(),
                propagation_speed_mps: s.params.propagation_speed(),
                snapshot_interval_s: s.params.snapshot_interval(),
                snapshot_count: s.params.snapshot_count(),
                energy_ratio: s.params.energy_ratio(),
            },
            pulses: s.pulses.map(|p| PulseSection {
                prt_s: p.prt,
                pulses_per_cit: p.pulses_per_cit,
            }),
            geometry: GeometrySection {
                transmitters: s.geometry.transmitters().iter().map(coords).collect(),
                receivers: s.geometry.receivers().iter().map(coords).collect(),
            },
            motion: MotionSection {
                x: s.truth.axis(Axis::X).to_vec(),
                y: s.truth.axis(Axis::Y).to_vec(),
                z: (dims == 3).then(|| s.truth.axis(Axis::Z).to_vec()),
            },
        }
    }
}

/// A built-in scenario by name.
pub fn preset(name: &str) -> Option<Scenario> {
    let text = match name {
        "example1" => EXAMPLE1,
        "example2" => EXAMPLE2,
        _ => return None,
    };
    Some(
        ScenarioConfig::parse(text)
            .and_then(|c| c.to_scenario())
            .expect("built-in presets are valid"),
    )
}

/// Loads a preset by name, or a scenario file from disk.
pub fn load_scenario(source: impl AsRef<Path>) -> Result<Scenario> {
    let source = source.as_ref();
    if let Some(s) = source.to_str().and_then(preset) {
        return Ok(s);
    }
    let text = std::fs::read_to_string(source).map_err(|e| {
        Error::Config {
            path: source.display().to_string(),
            message: e.to_string(),
        }
    })?;
    ScenarioConfig::parse(&text)?.to_scenario()
}
