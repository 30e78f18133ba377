use crate::fdi::{AlarmEvent, Channel, DetectionEvent, DetectorKind, ResidualSample};
use crate::monitor::{HealthSample, VitalVector};
use crate::scalar::Scalar;
use crate::vehicle::{ActuatorCommand, BodyState, SensorReading};

/// Planar pose and surge speed, the part of a body state that gets logged.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Track<T> {
    pub x: T,
    pub y: T,
    pub psi: T,
    pub u: T,
}

impl<T: Scalar> From<&BodyState<T>> for Track<T> {
    fn from(s: &BodyState<T>) -> Self {
        Self {
            x: s.x,
            y: s.y,
            psi: s.psi,
            u: s.u,
        }
    }
}

/// Per-channel pair, indexed by [`Channel`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerChannel<V> {
    pub heading: V,
    pub velocity: V,
}

impl<V: Copy> PerChannel<V> {
    pub fn get(&self, channel: Channel) -> V {
        match channel {
            Channel::Heading => self.heading,
            Channel::Velocity => self.velocity,
        }
    }

    pub fn set(&mut self, channel: Channel, value: V) {
        match channel {
            Channel::Heading => self.heading = value,
            Channel::Velocity => self.velocity = value,
        }
    }
}

/// Everything logged for one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TelemetryRecord<T> {
    pub t: T,
    pub plant: Track<T>,
    pub observer: Track<T>,
    pub reading: SensorReading<T>,
    pub command: ActuatorCommand<T>,
    pub vitals: VitalVector<T>,
    pub health: HealthSample<T>,
    pub residual: ResidualSample<T>,
    pub adaptive_threshold: PerChannel<T>,
    /// NaN when the channel has no static threshold.
    pub static_threshold: PerChannel<T>,
    pub adaptive_alarm: PerChannel<bool>,
    pub static_alarm: PerChannel<bool>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TelemetryLog<T> {
    pub records: Vec<TelemetryRecord<T>>,
    /// Alarm transitions in emission order.
    pub events: Vec<AlarmEvent<T>>,
    pub plant_collections: Vec<T>,
    pub observer_collections: Vec<T>,
}

impl<T: Scalar> TelemetryLog<T> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Raised alarms, optionally restricted to one detector.
    pub fn detections(&self, detector: Option<DetectorKind>) -> impl Iterator<Item = &DetectionEvent<T>> {
        self.events.iter().filter_map(move |e| match e {
            AlarmEvent::Raised(d) if detector.is_none_or(|k| k == d.detector) => Some(d),
            _ => None,
        })
    }
}
