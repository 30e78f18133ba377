//! One experiment: a faulty plant and a fault-free observer on the same
//! mission, wired through the health monitor and the detectors.

mod builtin;
mod config;
mod run;
mod summary;
mod telemetry;

pub use builtin::{
    builtin, builtin_scenarios, serpentine, straight, TestCase, BUILTIN_GYRO_OFFSET_DEG, BUILTIN_INJECTION_TIME,
};
pub use config::{FaultConfig, NoiseConfig, ObserverMode, ScenarioConfig, StartPose, TerrainSpec};
pub use run::{run_scenario, run_scenario_as, RunOutput, ScenarioError};
pub use summary::{summarize, ClearEvent, FaultLatency, RunSummary};
pub use telemetry::{PerChannel, TelemetryLog, TelemetryRecord, Track};
