//! Line-of-sight guidance, waypoint bookkeeping, and the heading/velocity
//! PID pair. Control consumes measured signals only, so sensor faults reach
//! the actuators the same way they would on the vehicle.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::{cast, impl_cast, lit, Scalar};
use crate::sim::wrap_angle;
use crate::vehicle::{ActuatorCommand, SensorReading};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Mission<T> {
    pub waypoints: Vec<(T, T)>,
    /// Collection radius around each waypoint, m. Defaults to half the
    /// default rover length.
    #[serde(default = "default_acceptance_radius")]
    pub acceptance_radius: T,
    #[serde(default = "default_cruise_speed")]
    pub cruise_speed: T,
}

fn default_acceptance_radius<T: Scalar>() -> T {
    lit(0.2)
}

fn default_cruise_speed<T: Scalar>() -> T {
    lit(0.25)
}

impl<T: Scalar> Mission<T> {
    pub fn new(waypoints: Vec<(T, T)>, acceptance_radius: T, cruise_speed: T) -> Result<Self> {
        let m = Self {
            waypoints,
            acceptance_radius,
            cruise_speed,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.waypoints.is_empty() {
            return Err(SimError::config(
                "mission.waypoints",
                "at least one waypoint is required",
            ));
        }
        if self.waypoints.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(SimError::config("mission.waypoints", "coordinates must be finite"));
        }
        if !(self.acceptance_radius > T::zero()) {
            return Err(SimError::config("mission.acceptance_radius", "must be positive"));
        }
        if !(self.cruise_speed > T::zero()) {
            return Err(SimError::config("mission.cruise_speed", "must be positive"));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> Mission<U> {
        Mission {
            waypoints: self.waypoints.iter().map(|&(x, y)| (cast(x), cast(y))).collect(),
            acceptance_radius: cast(self.acceptance_radius),
            cruise_speed: cast(self.cruise_speed),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct PidGains<T> {
    pub kp: T,
    pub ki: T,
    pub kd: T,
    /// Output saturation, symmetric.
    pub output_limit: T,
    /// Clamp on the accumulated error (anti-windup).
    pub integral_limit: T,
    /// Time constant of a first-order filter on the derivative term, s.
    /// Zero uses the raw difference quotient.
    #[serde(default = "T::zero")]
    pub derivative_filter_s: T,
}

impl_cast!(PidGains {
    kp,
    ki,
    kd,
    output_limit,
    integral_limit,
    derivative_filter_s
});

impl<T: Scalar> PidGains<T> {
    /// Gains whose integral term alone can reach at most half the output
    /// limit, i.e. `ki * integral_limit = output_limit / 2`.
    pub fn with_half_limit_integral(kp: T, ki: T, kd: T, output_limit: T) -> Self {
        let integral_limit = if ki > T::zero() {
            lit::<T>(0.5) * output_limit / ki
        } else {
            T::zero()
        };
        Self {
            kp,
            ki,
            kd,
            output_limit,
            integral_limit,
            derivative_filter_s: T::zero(),
        }
    }

    pub fn with_derivative_filter(self, time_constant: T) -> Self {
        Self {
            derivative_filter_s: time_constant,
            ..self
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        for (field, v) in [
            ("kp", self.kp),
            ("ki", self.ki),
            ("kd", self.kd),
            ("integral_limit", self.integral_limit),
            ("derivative_filter_s", self.derivative_filter_s),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(SimError::config(format!("{name}.{field}"), "must be finite and >= 0"));
            }
        }
        if !(self.output_limit > T::zero()) || !self.output_limit.is_finite() {
            return Err(SimError::config(format!("{name}.output_limit"), "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidController<T> {
    pub gains: PidGains<T>,
    pub integral: T,
    pub prev_error: T,
    /// Filtered derivative, equal to the raw one when unfiltered.
    pub derivative: T,
}

impl<T: Scalar> PidController<T> {
    pub fn new(gains: PidGains<T>) -> Self {
        Self {
            gains,
            integral: T::zero(),
            prev_error: T::zero(),
            derivative: T::zero(),
        }
    }

    /// `sat(kp e + ki int(e) + kd de/dt)` with the integral clamped to
    /// `+-integral_limit` before use. With a derivative filter the
    /// difference quotient passes through a backward-Euler low-pass first,
    /// so a step in the error spreads its kick over a few samples instead of
    /// losing most of it to saturation.
    pub fn step(&mut self, error: T, dt: T) -> T {
        let g = &self.gains;
        self.integral = (self.integral + error * dt)
            .max(-g.integral_limit)
            .min(g.integral_limit);
        let raw = (error - self.prev_error) / dt;
        self.derivative = if g.derivative_filter_s > T::zero() {
            self.derivative + dt / (g.derivative_filter_s + dt) * (raw - self.derivative)
        } else {
            raw
        };
        let derivative = self.derivative;
        self.prev_error = error;
        let out = g.kp * error + g.ki * self.integral + g.kd * derivative;
        out.max(-g.output_limit).min(g.output_limit)
    }

    pub fn reset(&mut self) {
        self.integral = T::zero();
        self.prev_error = T::zero();
        self.derivative = T::zero();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosHeading<T> {
    pub heading: T,
    /// Position and target coincide; `heading` is then 0.
    pub degenerate: bool,
}

pub fn los_heading<T: Scalar>(position: (T, T), target: (T, T)) -> LosHeading<T> {
    let dx = target.0 - position.0;
    let dy = target.1 - position.1;
    if dx == T::zero() && dy == T::zero() {
        return LosHeading {
            heading: T::zero(),
            degenerate: true,
        };
    }
    LosHeading {
        heading: wrap_angle(dy.atan2(dx)),
        degenerate: false,
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GuidanceState<T> {
    pub current_waypoint_index: usize,
    pub mission_complete: bool,
    pub collection_times: Vec<T>,
}

impl<T: Scalar> GuidanceState<T> {
    pub fn new() -> Self {
        Self {
            current_waypoint_index: 0,
            mission_complete: false,
            collection_times: Vec::new(),
        }
    }

    pub fn current_target(&self, mission: &Mission<T>) -> (T, T) {
        let i = self.current_waypoint_index.min(mission.waypoints.len() - 1);
        mission.waypoints[i]
    }
}

/// Collects the current waypoint once the rover is within the acceptance
/// radius (inclusive). At most one waypoint is collected per call.
pub fn update_waypoints<T: Scalar>(gs: &mut GuidanceState<T>, position: (T, T), mission: &Mission<T>, t: T) {
    if gs.mission_complete {
        return;
    }
    let (tx, ty) = mission.waypoints[gs.current_waypoint_index];
    let d = (tx - position.0).hypot(ty - position.1);
    if d <= mission.acceptance_radius {
        gs.collection_times.push(t);
        gs.current_waypoint_index += 1;
        if gs.current_waypoint_index == mission.waypoints.len() {
            gs.mission_complete = true;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ControllerGains<T> {
    pub heading: PidGains<T>,
    pub velocity: PidGains<T>,
}

impl<T: Scalar> Default for ControllerGains<T> {
    fn default() -> Self {
        let limit = lit::<T>(12.0);
        Self {
            heading: PidGains::with_half_limit_integral(lit(8.0), lit(0.5), lit(1.5), limit)
                .with_derivative_filter(lit(0.1)),
            velocity: PidGains::with_half_limit_integral(lit(20.0), lit(8.0), lit(0.0), limit),
        }
    }
}

impl<T: Scalar> ControllerGains<T> {
    pub fn cast<U: Scalar>(&self) -> ControllerGains<U> {
        ControllerGains {
            heading: self.heading.cast(),
            velocity: self.velocity.cast(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.heading.validate("gains.heading")?;
        self.velocity.validate("gains.velocity")
    }
}

/// Heading and velocity loops plus the last valid heading demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controllers<T> {
    pub heading: PidController<T>,
    pub velocity: PidController<T>,
    pub heading_demand: T,
}

impl<T: Scalar> Controllers<T> {
    pub fn new(gains: &ControllerGains<T>) -> Self {
        Self {
            heading: PidController::new(gains.heading),
            velocity: PidController::new(gains.velocity),
            heading_demand: T::zero(),
        }
    }
}

/// One control update: LOS heading demand, heading PID to a differential
/// voltage, velocity PID to a common voltage, each side saturated to
/// `max_voltage`. A completed mission commands zero volts.
pub fn control_step<T: Scalar>(
    reading: &SensorReading<T>,
    gs: &GuidanceState<T>,
    mission: &Mission<T>,
    ctrl: &mut Controllers<T>,
    max_voltage: T,
    dt: T,
) -> ActuatorCommand<T> {
    if gs.mission_complete {
        return ActuatorCommand::default();
    }
    let los = los_heading(reading.position_meas, gs.current_target(mission));
    if !los.degenerate {
        ctrl.heading_demand = los.heading;
    }
    let heading_error = wrap_angle(ctrl.heading_demand - reading.psi_meas);
    let differential = ctrl.heading.step(heading_error, dt);
    let common = ctrl.velocity.step(mission.cruise_speed - reading.speed_meas, dt);
    let sat = |v: T| v.max(-max_voltage).min(max_voltage);
    ActuatorCommand {
        v_left: sat(common - differential),
        v_right: sat(common + differential),
    }
}
