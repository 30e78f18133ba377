use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::telemetry::TelemetryLog;
use crate::error::{Result, SimError};
use crate::fdi::{AlarmEvent, Channel, DetectionEvent, DetectorKind};
use crate::scalar::{to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClearEvent {
    pub t: f64,
    pub channel: Channel,
    pub detector: DetectorKind,
}

/// Time from injection to the first alarm raised at or after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultLatency {
    pub kind: String,
    pub t_inject: f64,
    /// Earliest adaptive alarm on any channel.
    pub adaptive: Option<f64>,
    pub adaptive_heading: Option<f64>,
    pub adaptive_velocity: Option<f64>,
    /// Earliest static alarm on any channel.
    #[serde(rename = "static")]
    pub static_: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub steps: usize,
    pub t_end: f64,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
    pub detections: Vec<DetectionEvent<f64>>,
    pub clears: Vec<ClearEvent>,
    pub latencies: Vec<FaultLatency>,
    /// Minimum of the filtered health over the run.
    pub min_health: f64,
    pub health_at_end: f64,
    pub plant_collection_times: Vec<f64>,
    pub observer_collection_times: Vec<f64>,
    /// Plant minus observer collection time, per waypoint both collected.
    pub collection_deltas: Vec<f64>,
}

impl RunSummary {
    pub fn adaptive_detections(&self) -> impl Iterator<Item = &DetectionEvent<f64>> {
        self.detections.iter().filter(|d| d.detector == DetectorKind::Adaptive)
    }

    pub fn plant_waypoints_collected(&self) -> usize {
        self.plant_collection_times.len()
    }

    pub fn observer_waypoints_collected(&self) -> usize {
        self.observer_collection_times.len()
    }
}

fn first_after(events: &[DetectionEvent<f64>], t0: f64, keep: impl Fn(&DetectionEvent<f64>) -> bool) -> Option<f64> {
    events
        .iter()
        .filter(|e| e.t >= t0 && keep(e))
        .map(|e| e.t - t0)
        .min_by(f64::total_cmp)
}

pub fn summarize<T: Scalar>(log: &TelemetryLog<T>, cfg: &ScenarioConfig) -> Result<RunSummary> {
    let last = log
        .records
        .last()
        .ok_or_else(|| SimError::Domain("cannot summarise an empty telemetry log".into()))?;

    let mut detections = Vec::new();
    let mut clears = Vec::new();
    for e in &log.events {
        match *e {
            AlarmEvent::Raised(d) => detections.push(d.cast::<f64>()),
            AlarmEvent::Cleared { t, channel, detector } => clears.push(ClearEvent {
                t: to_f64(t),
                channel,
                detector,
            }),
        }
    }

    let latencies = cfg
        .faults
        .iter()
        .filter(|f| f.enabled())
        .map(|f| {
            let t0 = f.t_inject();
            let adaptive = |ch: Option<Channel>| {
                first_after(&detections, t0, |e| {
                    e.detector == DetectorKind::Adaptive && ch.is_none_or(|c| c == e.channel)
                })
            };
            FaultLatency {
                kind: f.label().to_string(),
                t_inject: t0,
                adaptive: adaptive(None),
                adaptive_heading: adaptive(Some(Channel::Heading)),
                adaptive_velocity: adaptive(Some(Channel::Velocity)),
                static_: first_after(&detections, t0, |e| e.detector == DetectorKind::Static),
            }
        })
        .collect();

    let min_health = log
        .records
        .iter()
        .map(|r| to_f64(r.health.h_filtered))
        .fold(f64::INFINITY, f64::min);
    let plant: Vec<f64> = log.plant_collections.iter().map(|&t| to_f64(t)).collect();
    let observer: Vec<f64> = log.observer_collections.iter().map(|&t| to_f64(t)).collect();
    let collection_deltas = plant.iter().zip(&observer).map(|(p, o)| p - o).collect();

    Ok(RunSummary {
        name: cfg.name.clone(),
        steps: log.records.len(),
        t_end: to_f64(last.t),
        aborted: None,
        detections,
        clears,
        latencies,
        min_health,
        health_at_end: to_f64(last.health.h_filtered),
        plant_collection_times: plant,
        observer_collection_times: observer,
        collection_deltas,
    })
}
