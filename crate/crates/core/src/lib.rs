//! Planetary rover health monitoring with observer-based fault detection.
//!
//! A six-wheel rover (the plant) drives a waypoint mission next to a
//! fault-free twin (the observer). Residuals between the two are compared
//! against health-aware adaptive thresholds, and a telemetry-only health
//! signal tracks how far the rover is from nominal behaviour.
//!
//! The simulation core is generic over the scalar type; `f64` and `f32`
//! aliases for the common types live at the crate root.
//!
//! ```
//! use rover_health::scenario::{run_scenario, straight, TestCase};
//!
//! let mut cfg = straight(TestCase::A);
//! cfg.duration = 2.0;
//! let out = run_scenario(&cfg).unwrap();
//! assert_eq!(out.log.len(), 200);
//! ```

// Validation writes `!(x > 0)` on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fdi;
pub mod gnc;
pub mod monitor;
mod scalar;
pub mod scenario;
pub mod sim;
pub mod terrain;
pub mod vehicle;

pub use error::{Result, SimError};
pub use scalar::{cast, lit, smooth_sign, to_f64, Scalar};

pub type BodyState64 = vehicle::BodyState<f64>;
pub type BodyState32 = vehicle::BodyState<f32>;
pub type RoverParams64 = vehicle::RoverParams<f64>;
pub type RoverParams32 = vehicle::RoverParams<f32>;
pub type Terrain64 = terrain::Terrain<f64>;
pub type Terrain32 = terrain::Terrain<f32>;
pub type FilterState64 = sim::FilterState<f64>;
pub type FilterState32 = sim::FilterState<f32>;
pub type TelemetryLog64 = scenario::TelemetryLog<f64>;
pub type TelemetryLog32 = scenario::TelemetryLog<f32>;
pub type TelemetryRecord64 = scenario::TelemetryRecord<f64>;
pub type TelemetryRecord32 = scenario::TelemetryRecord<f32>;
