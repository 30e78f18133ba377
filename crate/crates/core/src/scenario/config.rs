use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fdi::ThresholdConfig;
use crate::gnc::{ControllerGains, Mission};
use crate::monitor::{MonitorConfig, VitalParams};
use crate::scalar::Scalar;
use crate::sim::NoiseSigmas;
use crate::terrain::{load_ascii_grid, HeightGrid, Terrain, TerrainError};
use crate::vehicle::{FaultSet, FaultSpec, RoverParams};

/// Terrain as written in a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TerrainSpec {
    #[default]
    Flat,
    /// Plane rising along `azimuth` (rad from +x) with gradient `slope`.
    Incline { slope: f64, azimuth: f64 },
    /// `h = amplitude sin(2 pi x / wavelength)`.
    Sinusoid { amplitude: f64, wavelength: f64 },
    /// ESRI ASCII grid file.
    AsciiGrid { path: PathBuf },
    /// Inline node grid; row 0 is the southern edge.
    Grid {
        ncols: usize,
        nrows: usize,
        origin: [f64; 2],
        cell: f64,
        heights: Vec<f64>,
    },
}

impl TerrainSpec {
    pub fn build<T: Scalar>(&self) -> Result<Terrain<T>, TerrainError> {
        let terrain = match self {
            TerrainSpec::Flat => Terrain::Flat,
            TerrainSpec::Incline { slope, azimuth } => Terrain::Incline {
                slope: *slope,
                azimuth: *azimuth,
            }
            .cast(),
            TerrainSpec::Sinusoid { amplitude, wavelength } => Terrain::Sinusoid {
                amplitude: *amplitude,
                wavelength: *wavelength,
            }
            .cast(),
            TerrainSpec::AsciiGrid { path } => load_ascii_grid::<f64>(path)?.cast(),
            TerrainSpec::Grid {
                ncols,
                nrows,
                origin,
                cell,
                heights,
            } => Terrain::Grid(HeightGrid::new(
                *ncols,
                *nrows,
                (origin[0], origin[1]),
                *cell,
                heights.clone(),
            )?)
            .cast(),
        };
        terrain.validate()?;
        Ok(terrain)
    }
}

/// A fault as written in a scenario file. Angles are in degrees here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FaultConfig {
    GyroOffset {
        offset_deg: f64,
        t_inject: f64,
        #[serde(default = "enabled_by_default")]
        enabled: bool,
    },
    MotorFailure {
        wheel_index: usize,
        t_inject: f64,
        #[serde(default = "enabled_by_default")]
        enabled: bool,
    },
}

fn enabled_by_default() -> bool {
    true
}

impl FaultConfig {
    pub fn t_inject(&self) -> f64 {
        match self {
            FaultConfig::GyroOffset { t_inject, .. } | FaultConfig::MotorFailure { t_inject, .. } => *t_inject,
        }
    }

    pub fn enabled(&self) -> bool {
        match self {
            FaultConfig::GyroOffset { enabled, .. } | FaultConfig::MotorFailure { enabled, .. } => *enabled,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            FaultConfig::GyroOffset { .. } => "gyro_offset",
            FaultConfig::MotorFailure { .. } => "motor_failure",
        }
    }

    pub fn to_spec<T: Scalar>(&self) -> FaultSpec<T> {
        let spec = match *self {
            FaultConfig::GyroOffset {
                offset_deg,
                t_inject,
                enabled,
            } => FaultSpec {
                enabled,
                ..FaultSpec::gyro_offset(offset_deg.to_radians(), t_inject)
            },
            FaultConfig::MotorFailure {
                wheel_index,
                t_inject,
                enabled,
            } => FaultSpec {
                enabled,
                ..FaultSpec::motor_failure(wheel_index, t_inject)
            },
        };
        spec.cast()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub seed: u64,
    pub sigma: NoiseSigmas<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            seed: 0,
            sigma: NoiseSigmas::default(),
        }
    }
}

/// How the fault-free reference model is driven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverMode {
    /// Own closed loop on the same mission, sensing its true state.
    #[default]
    Independent,
    /// Open loop, fed the plant's actuator commands.
    SharedCommand,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    /// Initial heading, rad.
    pub psi: f64,
}

fn default_dt() -> f64 {
    0.01
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub terrain: TerrainSpec,
    pub mission: Mission<f64>,
    #[serde(default)]
    pub start: StartPose,
    #[serde(default)]
    pub rover: RoverParams<f64>,
    #[serde(default)]
    pub gains: ControllerGains<f64>,
    #[serde(default)]
    pub vitals: VitalParams<f64>,
    #[serde(default)]
    pub monitor: MonitorConfig<f64>,
    #[serde(default)]
    pub thresholds: ThresholdConfig<f64>,
    #[serde(default)]
    pub faults: Vec<FaultConfig>,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Simulated time limit, s.
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub observer_mode: ObserverMode,
}

impl ScenarioConfig {
    /// Checks every field that can be checked without touching the file
    /// system. Grid files are checked when the terrain is built.
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(SimError::config("name", "must not be empty"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(SimError::config("dt", "must be a positive, finite step"));
        }
        if !(self.duration > 0.0) || !self.duration.is_finite() {
            return Err(SimError::config("duration", "must be positive and finite"));
        }
        if self.dt > self.duration {
            return Err(SimError::config("dt", "must not exceed duration"));
        }
        for (field, v) in [
            ("start.x", self.start.x),
            ("start.y", self.start.y),
            ("start.psi", self.start.psi),
        ] {
            if !v.is_finite() {
                return Err(SimError::config(field, "must be finite"));
            }
        }
        self.mission.validate()?;
        self.rover.validate()?;
        self.gains.validate()?;
        self.vitals.validate()?;
        self.monitor.validate()?;
        self.thresholds.validate()?;
        self.noise.sigma.validate()?;
        self.fault_set::<f64>()?;
        match &self.terrain {
            TerrainSpec::AsciiGrid { .. } => Ok(()),
            spec => spec
                .build::<f64>()
                .map(|_| ())
                .map_err(|e| SimError::config("terrain", e.to_string())),
        }
    }

    pub fn fault_set<T: Scalar>(&self) -> Result<FaultSet<T>> {
        FaultSet::new(self.faults.iter().map(FaultConfig::to_spec).collect())
    }

    /// Injection time of the earliest enabled fault.
    pub fn first_injection(&self) -> Option<f64> {
        self.faults
            .iter()
            .filter(|f| f.enabled())
            .map(FaultConfig::t_inject)
            .min_by(f64::total_cmp)
    }

    /// Number of fixed steps covering `duration`.
    pub fn step_count(&self) -> u64 {
        (self.duration / self.dt).round().max(1.0) as u64
    }
}
