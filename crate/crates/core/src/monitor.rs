//! Rover vitals and entropy-based health.
//!
//! Four vitals map telemetry to a likelihood of degradation in `[0, 1]`:
//! forward acceleration, rate of change of distance to the target, heading
//! rate, and rate of change of the commanded motor voltage. Their mean is the
//! degradation probability `P`, and health is one minus the binary entropy
//! (in bits) of `{P, 1 - P}`, smoothed by a critically damped second-order
//! low-pass.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::{impl_cast, lit, Scalar};
use crate::sim::{FilterKind, FilterState};
use crate::vehicle::{ActuatorCommand, SensorReading};

/// Normalisation applied to the sum of the four vitals.
pub const VITAL_NORMALISATION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VitalVector<T> {
    pub v_accel: T,
    pub v_dist_rate: T,
    pub v_heading_rate: T,
    pub v_voltage_rate: T,
}

impl<T: Scalar> VitalVector<T> {
    pub fn as_array(&self) -> [T; 4] {
        [self.v_accel, self.v_dist_rate, self.v_heading_rate, self.v_voltage_rate]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct VitalParams<T> {
    pub sigma_accel: T,
    pub sigma_heading: T,
    pub sigma_voltage: T,
    /// Logistic steepness of the distance-rate vital, s/m.
    pub k: T,
    /// Logistic midpoint of the distance-rate vital, m/s.
    pub x0: T,
}

impl_cast!(VitalParams {
    sigma_accel,
    sigma_heading,
    sigma_voltage,
    k,
    x0
});

impl<T: Scalar> Default for VitalParams<T> {
    fn default() -> Self {
        Self {
            sigma_accel: lit(0.4),
            sigma_heading: lit(0.4),
            sigma_voltage: lit(0.4),
            k: lit(20.0),
            x0: lit(0.1),
        }
    }
}

impl<T: Scalar> VitalParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("vitals.sigma_accel", self.sigma_accel),
            ("vitals.sigma_heading", self.sigma_heading),
            ("vitals.sigma_voltage", self.sigma_voltage),
            ("vitals.k", self.k),
        ] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(SimError::config(name, "must be positive and finite"));
            }
        }
        if !self.x0.is_finite() {
            return Err(SimError::config("vitals.x0", "must be finite"));
        }
        Ok(())
    }
}

/// What the voltage vital is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoltageVitalInput {
    /// Rate of change of the (smoothed) mean commanded voltage, V/s.
    #[default]
    Rate,
    /// The mean commanded voltage itself, V.
    Level,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct MonitorConfig<T> {
    /// Clamp `P` at 0.5 before the entropy so health is monotone in `P`.
    pub clamp_p: bool,
    /// Cutoff of the second-order health filter, Hz.
    pub health_cutoff_hz: T,
    /// Moving-average length (samples) applied to the distance rate.
    pub distance_rate_window: usize,
    /// Cutoff of the second-order low-pass applied to the mean commanded
    /// voltage before differentiation, Hz.
    pub voltage_filter_hz: T,
    pub voltage_input: VoltageVitalInput,
}

impl<T: Scalar> Default for MonitorConfig<T> {
    fn default() -> Self {
        Self {
            clamp_p: true,
            health_cutoff_hz: lit(1.0),
            distance_rate_window: 5,
            voltage_filter_hz: lit(0.5),
            voltage_input: VoltageVitalInput::Rate,
        }
    }
}

impl<T: Scalar> MonitorConfig<T> {
    pub fn cast<U: Scalar>(&self) -> MonitorConfig<U> {
        MonitorConfig {
            clamp_p: self.clamp_p,
            health_cutoff_hz: crate::scalar::cast(self.health_cutoff_hz),
            distance_rate_window: self.distance_rate_window,
            voltage_filter_hz: crate::scalar::cast(self.voltage_filter_hz),
            voltage_input: self.voltage_input,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.distance_rate_window == 0 {
            return Err(SimError::config("monitor.distance_rate_window", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HealthSample<T> {
    pub p: T,
    pub h_raw: T,
    pub h_filtered: T,
}

/// `1 - exp(-x^2 / 2 sigma^2) / (sigma sqrt(2 pi))`, clamped to `[0, 1]`.
///
/// For `sigma < 1/sqrt(2 pi)` the unclamped value at `x = 0` would be
/// negative; the clamp keeps the vital a probability.
pub fn vital_gaussian<T: Scalar>(x: T, sigma: T) -> T {
    let peak = T::one() / (sigma * T::TAU().sqrt());
    let v = T::one() - peak * (-(x * x) / (lit::<T>(2.0) * sigma * sigma)).exp();
    v.max(T::zero()).min(T::one())
}

/// Logistic `1 / (1 + exp(-k (d_dot - x0)))`.
pub fn vital_dist_rate<T: Scalar>(d_dot: T, k: T, x0: T) -> T {
    T::one() / (T::one() + (-k * (d_dot - x0)).exp())
}

/// Mean of the four vitals.
pub fn degradation_probability<T: Scalar>(v: &VitalVector<T>) -> T {
    lit::<T>(VITAL_NORMALISATION) * v.as_array().iter().fold(T::zero(), |a, &b| a + b)
}

/// Binary entropy in bits with `0 log 0 = 0`.
pub fn binary_entropy<T: Scalar>(p: T) -> T {
    let term = |q: T| if q > T::zero() { -q * q.log2() } else { T::zero() };
    term(p) + term(T::one() - p)
}

/// `1 - H_b(p)`, with `p` clamped to `[0, 0.5]` first when `clamp_p` is set.
pub fn health_raw<T: Scalar>(p: T, clamp_p: bool) -> T {
    let p = p.max(T::zero()).min(T::one());
    let q = if clamp_p { p.min(lit(0.5)) } else { p };
    (T::one() - binary_entropy(q)).max(T::zero()).min(T::one())
}

#[derive(Debug, Clone)]
pub struct MonitorState<T> {
    config: MonitorConfig<T>,
    prev_distance: Option<T>,
    prev_target: Option<(T, T)>,
    rate_window: VecDeque<T>,
    voltage_filter: FilterState<T>,
    prev_voltage: Option<T>,
    health_filter: FilterState<T>,
    health_primed: bool,
}

impl<T: Scalar> MonitorState<T> {
    pub fn new(config: MonitorConfig<T>, dt: T) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            voltage_filter: FilterState::new(FilterKind::LowPass2, config.voltage_filter_hz, dt)
                .map_err(|e| rename(e, "monitor.voltage_filter_hz"))?,
            health_filter: FilterState::new(FilterKind::LowPass2, config.health_cutoff_hz, dt)
                .map_err(|e| rename(e, "monitor.health_cutoff_hz"))?,
            rate_window: VecDeque::with_capacity(config.distance_rate_window),
            config,
            prev_distance: None,
            prev_target: None,
            prev_voltage: None,
            health_primed: false,
        })
    }

    pub fn config(&self) -> &MonitorConfig<T> {
        &self.config
    }

    /// Smoothed rate of change of the distance to `target`.
    ///
    /// The first sample, and the first sample after the target changes,
    /// returns 0 and restarts the moving average.
    pub fn distance_rate(&mut self, position: (T, T), target: (T, T), dt: T) -> T {
        let d = (target.0 - position.0).hypot(target.1 - position.1);
        let prev = match (self.prev_distance, self.prev_target) {
            (Some(p), Some(tgt)) if tgt == target => p,
            _ => {
                self.prev_distance = Some(d);
                self.prev_target = Some(target);
                self.rate_window.clear();
                return T::zero();
            }
        };
        self.prev_distance = Some(d);
        if self.rate_window.len() == self.config.distance_rate_window {
            self.rate_window.pop_front();
        }
        self.rate_window.push_back((d - prev) / dt);
        let n = lit::<T>(self.rate_window.len() as f64);
        self.rate_window.iter().fold(T::zero(), |a, &b| a + b) / n
    }

    fn voltage_signal(&mut self, cmd: &ActuatorCommand<T>, dt: T) -> T {
        let mean = cmd.mean();
        match self.config.voltage_input {
            VoltageVitalInput::Level => mean,
            VoltageVitalInput::Rate => {
                let filtered = match self.prev_voltage {
                    None => {
                        self.voltage_filter.prime(mean);
                        mean
                    }
                    Some(_) => self.voltage_filter.step(mean),
                };
                let rate = self.prev_voltage.map_or(T::zero(), |p| (filtered - p) / dt);
                self.prev_voltage = Some(filtered);
                rate
            }
        }
    }

    pub fn compute_vitals(
        &mut self,
        reading: &SensorReading<T>,
        cmd: &ActuatorCommand<T>,
        target: (T, T),
        params: &VitalParams<T>,
        dt: T,
    ) -> VitalVector<T> {
        let d_dot = self.distance_rate(reading.position_meas, target, dt);
        let voltage = self.voltage_signal(cmd, dt);
        VitalVector {
            v_accel: vital_gaussian(reading.accel_x, params.sigma_accel),
            v_dist_rate: vital_dist_rate(d_dot, params.k, params.x0),
            v_heading_rate: vital_gaussian(reading.gyro_rate, params.sigma_heading),
            v_voltage_rate: vital_gaussian(voltage, params.sigma_voltage),
        }
    }

    /// Vitals, degradation probability, raw and filtered health for one step.
    /// The health filter starts at the first raw value.
    pub fn step(
        &mut self,
        reading: &SensorReading<T>,
        cmd: &ActuatorCommand<T>,
        target: (T, T),
        params: &VitalParams<T>,
        dt: T,
    ) -> (VitalVector<T>, HealthSample<T>) {
        let vitals = self.compute_vitals(reading, cmd, target, params, dt);
        let p = degradation_probability(&vitals);
        let h_raw = health_raw(p, self.config.clamp_p);
        let h_filtered = if self.health_primed {
            self.health_filter.step(h_raw)
        } else {
            self.health_primed = true;
            self.health_filter.prime(h_raw);
            h_raw
        };
        (vitals, HealthSample { p, h_raw, h_filtered })
    }
}

fn rename(e: SimError, field: &str) -> SimError {
    match e {
        SimError::Config { reason, .. } => SimError::config(field, reason),
        other => other,
    }
}
