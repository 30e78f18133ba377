//! The plant: a six-wheel differential-drive rover with DC-motor actuators,
//! sensors, and the gyro-offset and motor-failure fault modes.
//!
//! The dynamic degrees of freedom are surge `u` and yaw rate `r`; sway is
//! held at zero by the no-slip wheel contact and heave, roll and pitch follow
//! the terrain kinematically. With `v = 0` and planar rotation the Coriolis
//! coupling vanishes, leaving
//!
//! ```text
//! m  du/dt = sum F_wheel + F_drag - D_u u - F_roll + m g sin(theta)
//! Iz dr/dt = (F_right - F_left) b/2 + N_drag - D_r r
//! dx/dt = u cos(psi) cos(theta),  dy/dt = u sin(psi) cos(theta),  dpsi/dt = r
//! ```
//!
//! Positive yaw turns the rover towards its left side, so a faster right
//! track produces positive `r`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::{cast, impl_cast, lit, smooth_sign, to_f64, Scalar};
use crate::sim::{rk4_step, wrap_angle, NoiseSource};
use crate::terrain::Terrain;

pub const WHEEL_COUNT: usize = 6;

/// Wheel indices: 0..3 are the left side front to rear, 3..6 the right side.
pub const FRONT_LEFT: usize = 0;

/// Velocity scale (m/s) of the smoothed sign used by rolling resistance and
/// failed-wheel drag.
const SIGN_WIDTH: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn of_wheel(index: usize) -> Side {
        if index < WHEEL_COUNT / 2 {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Sign of this side's contribution to the yaw moment.
    fn yaw_sign<T: Scalar>(self) -> T {
        match self {
            Side::Left => -T::one(),
            Side::Right => T::one(),
        }
    }
}

/// Body velocities, earth-frame position and Euler angles.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BodyState<T> {
    pub u: T,
    pub v: T,
    pub w: T,
    pub p: T,
    pub q: T,
    pub r: T,
    pub x: T,
    pub y: T,
    pub z: T,
    pub phi: T,
    pub theta: T,
    pub psi: T,
}

impl_cast!(BodyState {
    u,
    v,
    w,
    p,
    q,
    r,
    x,
    y,
    z,
    phi,
    theta,
    psi
});

impl<T: Scalar> BodyState<T> {
    /// At rest at `(x, y)` heading `psi`, settled onto the terrain.
    pub fn at_rest(x: T, y: T, psi: T, terrain: &Terrain<T>) -> Self {
        let mut s = BodyState {
            x,
            y,
            psi: wrap_angle(psi),
            ..Default::default()
        };
        s.settle(terrain);
        s
    }

    /// Applies the on-surface constraint: `z = -height`, roll and pitch from the local slope.
    pub fn settle(&mut self, terrain: &Terrain<T>) {
        self.z = -terrain.height(self.x, self.y);
        let (phi, theta) = terrain.attitude(self.x, self.y, self.psi);
        self.phi = phi;
        self.theta = theta;
        self.v = T::zero();
        self.w = T::zero();
        self.p = T::zero();
        self.q = T::zero();
    }

    pub fn is_finite(&self) -> bool {
        [
            self.u, self.v, self.w, self.p, self.q, self.r, self.x, self.y, self.z, self.phi, self.theta, self.psi,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    pub fn kinetic_energy(&self, params: &RoverParams<T>) -> T {
        lit::<T>(0.5) * (params.mass * self.u * self.u + params.yaw_inertia * self.r * self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct MotorParams<T> {
    /// Lumped `K_t / R_a`: wheel torque per volt of net armature voltage, N m/V.
    pub torque_constant: T,
    /// Back-EMF constant `K_e`, V s/rad.
    pub back_emf_constant: T,
    pub max_voltage: T,
}

impl_cast!(MotorParams {
    torque_constant,
    back_emf_constant,
    max_voltage
});

impl<T: Scalar> Default for MotorParams<T> {
    fn default() -> Self {
        Self {
            torque_constant: lit(0.0075),
            back_emf_constant: lit(0.3),
            max_voltage: lit(12.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct RoverParams<T> {
    pub mass: T,
    pub yaw_inertia: T,
    /// Surge damping `D_u`, N s/m.
    pub surge_damping: T,
    /// Sway damping; unused while sway is constrained but kept for completeness.
    pub sway_damping: T,
    /// Yaw damping `D_r`, N m s/rad.
    pub yaw_damping: T,
    pub length: T,
    pub track_width: T,
    pub wheel_radius: T,
    pub wheel_count: usize,
    pub motor: MotorParams<T>,
    pub rolling_resistance_coeff: T,
    pub drag_coeff_failed_wheel: T,
    pub gravity: T,
}

impl<T: Scalar> Default for RoverParams<T> {
    fn default() -> Self {
        Self {
            mass: lit(5.0),
            yaw_inertia: lit(0.15),
            surge_damping: lit(2.0),
            sway_damping: lit(2.0),
            yaw_damping: lit(0.2),
            length: lit(0.4),
            track_width: lit(0.3),
            wheel_radius: lit(0.06),
            wheel_count: WHEEL_COUNT,
            motor: MotorParams::default(),
            rolling_resistance_coeff: lit(0.03),
            drag_coeff_failed_wheel: lit(0.5),
            gravity: lit(3.71),
        }
    }
}

impl<T: Scalar> RoverParams<T> {
    pub fn cast<U: Scalar>(&self) -> RoverParams<U> {
        RoverParams {
            mass: cast(self.mass),
            yaw_inertia: cast(self.yaw_inertia),
            surge_damping: cast(self.surge_damping),
            sway_damping: cast(self.sway_damping),
            yaw_damping: cast(self.yaw_damping),
            length: cast(self.length),
            track_width: cast(self.track_width),
            wheel_radius: cast(self.wheel_radius),
            wheel_count: self.wheel_count,
            motor: self.motor.cast(),
            rolling_resistance_coeff: cast(self.rolling_resistance_coeff),
            drag_coeff_failed_wheel: cast(self.drag_coeff_failed_wheel),
            gravity: cast(self.gravity),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rover.mass", self.mass),
            ("rover.yaw_inertia", self.yaw_inertia),
            ("rover.surge_damping", self.surge_damping),
            ("rover.sway_damping", self.sway_damping),
            ("rover.yaw_damping", self.yaw_damping),
            ("rover.length", self.length),
            ("rover.track_width", self.track_width),
            ("rover.wheel_radius", self.wheel_radius),
            ("rover.motor.torque_constant", self.motor.torque_constant),
            ("rover.motor.back_emf_constant", self.motor.back_emf_constant),
            ("rover.motor.max_voltage", self.motor.max_voltage),
            ("rover.rolling_resistance_coeff", self.rolling_resistance_coeff),
            ("rover.drag_coeff_failed_wheel", self.drag_coeff_failed_wheel),
            ("rover.gravity", self.gravity),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(SimError::config(name, format!("must be positive and finite, got {v}")));
            }
        }
        if self.wheel_count != WHEEL_COUNT {
            return Err(SimError::config(
                "rover.wheel_count",
                "only six-wheel rovers are modelled",
            ));
        }
        if !(self.track_width < self.length + self.length) {
            return Err(SimError::config(
                "rover.track_width",
                "must be less than twice the length",
            ));
        }
        Ok(())
    }

    /// Largest force magnitude a single wheel can deliver.
    pub fn max_wheel_force(&self) -> T {
        self.motor.torque_constant * self.motor.max_voltage / self.wheel_radius
    }

    /// Normal load per wheel on level ground.
    pub fn wheel_load(&self) -> T {
        self.mass * self.gravity / lit::<T>(WHEEL_COUNT as f64)
    }
}

/// Per-side commanded motor voltages, each applied to that side's three wheels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActuatorCommand<T> {
    pub v_left: T,
    pub v_right: T,
}

impl_cast!(ActuatorCommand { v_left, v_right });

impl<T: Scalar> ActuatorCommand<T> {
    pub fn mean(&self) -> T {
        (self.v_left + self.v_right) * lit(0.5)
    }

    pub fn for_side(&self, side: Side) -> T {
        match side {
            Side::Left => self.v_left,
            Side::Right => self.v_right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultKind<T> {
    /// Additive step on the measured heading, rad.
    GyroOffset { offset: T },
    /// The wheel stops producing propulsion and drags.
    MotorFailure { wheel_index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultSpec<T> {
    pub kind: FaultKind<T>,
    pub t_inject: T,
    pub enabled: bool,
}

impl<T: Scalar> FaultSpec<T> {
    pub fn gyro_offset(offset: T, t_inject: T) -> Self {
        Self {
            kind: FaultKind::GyroOffset { offset },
            t_inject,
            enabled: true,
        }
    }

    pub fn motor_failure(wheel_index: usize, t_inject: T) -> Self {
        Self {
            kind: FaultKind::MotorFailure { wheel_index },
            t_inject,
            enabled: true,
        }
    }

    pub fn active_at(&self, t: T) -> bool {
        self.enabled && t >= self.t_inject
    }

    pub fn cast<U: Scalar>(&self) -> FaultSpec<U> {
        FaultSpec {
            kind: match self.kind {
                FaultKind::GyroOffset { offset } => FaultKind::GyroOffset { offset: cast(offset) },
                FaultKind::MotorFailure { wheel_index } => FaultKind::MotorFailure { wheel_index },
            },
            t_inject: cast(self.t_inject),
            enabled: self.enabled,
        }
    }
}

/// The faults configured for one run; at most one of each kind.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FaultSet<T> {
    faults: Vec<FaultSpec<T>>,
}

impl<T: Scalar> FaultSet<T> {
    pub fn none() -> Self {
        Self { faults: Vec::new() }
    }

    pub fn new(faults: Vec<FaultSpec<T>>) -> Result<Self> {
        let mut gyro = 0;
        let mut motor = 0;
        for (i, f) in faults.iter().enumerate() {
            if !(f.t_inject >= T::zero()) || !f.t_inject.is_finite() {
                return Err(SimError::config(
                    format!("faults[{i}].t_inject"),
                    "must be finite and >= 0",
                ));
            }
            match f.kind {
                FaultKind::GyroOffset { offset } => {
                    if !offset.is_finite() {
                        return Err(SimError::config(format!("faults[{i}].offset_deg"), "must be finite"));
                    }
                    gyro += 1;
                }
                FaultKind::MotorFailure { wheel_index } => {
                    if wheel_index >= WHEEL_COUNT {
                        return Err(SimError::config(format!("faults[{i}].wheel_index"), "must be in 0..=5"));
                    }
                    motor += 1;
                }
            }
        }
        if gyro > 1 || motor > 1 {
            return Err(SimError::config("faults", "at most one fault of each kind per run"));
        }
        Ok(Self { faults })
    }

    pub fn iter(&self) -> impl Iterator<Item = &FaultSpec<T>> {
        self.faults.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.faults.iter().all(|f| !f.enabled)
    }

    pub fn heading_offset(&self, t: T) -> T {
        self.faults
            .iter()
            .filter(|f| f.active_at(t))
            .filter_map(|f| match f.kind {
                FaultKind::GyroOffset { offset } => Some(offset),
                _ => None,
            })
            .fold(T::zero(), |a, b| a + b)
    }

    pub fn failed_wheels(&self, t: T) -> [bool; WHEEL_COUNT] {
        let mut failed = [false; WHEEL_COUNT];
        for f in self.faults.iter().filter(|f| f.active_at(t)) {
            if let FaultKind::MotorFailure { wheel_index } = f.kind {
                failed[wheel_index] = true;
            }
        }
        failed
    }

    pub fn cast<U: Scalar>(&self) -> FaultSet<U> {
        FaultSet {
            faults: self.faults.iter().map(FaultSpec::cast).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SensorReading<T> {
    pub psi_meas: T,
    pub gyro_rate: T,
    pub accel_x: T,
    pub speed_meas: T,
    pub position_meas: (T, T),
    pub t: T,
}

/// Force of one wheel at the given net motor voltage and wheel speed,
/// `F = K (V - K_e w) / R`, limited to the stall force at full voltage.
pub fn wheel_force<T: Scalar>(v_cmd: T, wheel_speed: T, params: &RoverParams<T>) -> T {
    let m = &params.motor;
    let f = m.torque_constant * (v_cmd - m.back_emf_constant * wheel_speed) / params.wheel_radius;
    let limit = params.max_wheel_force();
    f.max(-limit).min(limit)
}

/// Wheel forces after motor failures have been applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelLoads<T> {
    /// Propulsive force of each wheel (zero for failed wheels).
    pub forces: [T; WHEEL_COUNT],
    /// Total sliding drag along surge from failed wheels.
    pub drag_force: T,
    /// Yaw moment of that drag.
    pub drag_moment: T,
}

/// Zeroes the propulsion of every failed wheel and adds its sliding drag
/// `-sign(u) c_d m g / 6` at the wheel's lateral offset.
pub fn apply_motor_failure<T: Scalar>(
    forces: [T; WHEEL_COUNT],
    failed: &[bool; WHEEL_COUNT],
    u: T,
    params: &RoverParams<T>,
) -> WheelLoads<T> {
    let mut out = WheelLoads {
        forces,
        drag_force: T::zero(),
        drag_moment: T::zero(),
    };
    let drag = -smooth_sign(u, lit(SIGN_WIDTH)) * params.drag_coeff_failed_wheel * params.wheel_load();
    let half_track = params.track_width * lit(0.5);
    for (i, &dead) in failed.iter().enumerate() {
        if dead {
            out.forces[i] = T::zero();
            out.drag_force += drag;
            out.drag_moment += Side::of_wheel(i).yaw_sign::<T>() * drag * half_track;
        }
    }
    out
}

/// Time derivative of the dynamic and planar kinematic states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateDerivative<T> {
    pub du: T,
    pub dr: T,
    pub dx: T,
    pub dy: T,
    pub dpsi: T,
}

/// Wheel angular speed of one side under rolling without slip.
fn side_wheel_speed<T: Scalar>(u: T, r: T, side: Side, params: &RoverParams<T>) -> T {
    (u + side.yaw_sign::<T>() * r * params.track_width * lit(0.5)) / params.wheel_radius
}

pub fn dynamics_derivative<T: Scalar>(
    state: &BodyState<T>,
    cmd: &ActuatorCommand<T>,
    faults: &FaultSet<T>,
    terrain: &Terrain<T>,
    params: &RoverParams<T>,
    t: T,
) -> Result<StateDerivative<T>> {
    let (_, theta) = terrain.attitude(state.x, state.y, state.psi);
    let mut forces = [T::zero(); WHEEL_COUNT];
    for (i, f) in forces.iter_mut().enumerate() {
        let side = Side::of_wheel(i);
        *f = wheel_force(
            cmd.for_side(side),
            side_wheel_speed(state.u, state.r, side, params),
            params,
        );
    }
    let loads = apply_motor_failure(forces, &faults.failed_wheels(t), state.u, params);

    let mut propulsion = T::zero();
    let mut side_diff = T::zero();
    for (i, f) in loads.forces.iter().enumerate() {
        propulsion += *f;
        side_diff += Side::of_wheel(i).yaw_sign::<T>() * *f;
    }
    let weight = params.mass * params.gravity;
    let rolling = params.rolling_resistance_coeff * weight * theta.cos() * smooth_sign(state.u, lit(SIGN_WIDTH));
    let surge = propulsion + loads.drag_force - params.surge_damping * state.u - rolling + weight * theta.sin();
    let yaw = side_diff * params.track_width * lit(0.5) + loads.drag_moment - params.yaw_damping * state.r;
    if !surge.is_finite() || !yaw.is_finite() {
        return Err(SimError::NonFinite {
            what: "wheel force",
            t: to_f64(t),
        });
    }

    let (s, c) = state.psi.sin_cos();
    let ground = state.u * theta.cos();
    Ok(StateDerivative {
        du: surge / params.mass,
        dr: yaw / params.yaw_inertia,
        dx: ground * c,
        dy: ground * s,
        dpsi: state.r,
    })
}

/// Advances the plant one step with the command and fault set held over the
/// step, then re-settles it onto the terrain.
pub fn integrate_step<T: Scalar>(
    state: &BodyState<T>,
    cmd: &ActuatorCommand<T>,
    faults: &FaultSet<T>,
    terrain: &Terrain<T>,
    params: &RoverParams<T>,
    t: T,
    dt: T,
) -> Result<BodyState<T>> {
    let mut failure: Option<SimError> = None;
    let packed = [state.u, state.r, state.x, state.y, state.psi];
    let next = rk4_step(&packed, t, dt, |_, x| {
        let s = BodyState {
            u: x[0],
            r: x[1],
            x: x[2],
            y: x[3],
            psi: x[4],
            ..*state
        };
        // Fault activity is sampled at the step start (zero-order hold).
        match dynamics_derivative(&s, cmd, faults, terrain, params, t) {
            Ok(d) => [d.du, d.dr, d.dx, d.dy, d.dpsi],
            Err(e) => {
                failure.get_or_insert(e);
                [T::nan(); 5]
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let x = next?;
    let mut out = BodyState {
        u: x[0],
        r: x[1],
        x: x[2],
        y: x[3],
        psi: wrap_angle(x[4]),
        ..*state
    };
    out.settle(terrain);
    if !out.is_finite() {
        return Err(SimError::NonFinite {
            what: "body state",
            t: to_f64(t + dt),
        });
    }
    Ok(out)
}

/// Samples the rover's sensors. The gyro offset corrupts only the measured
/// heading; the true state is untouched. Noise channels are drawn in a fixed
/// order every call so streams stay aligned across runs.
pub fn sense<T: Scalar>(
    state: &BodyState<T>,
    prev_u: T,
    faults: &FaultSet<T>,
    noise: &mut NoiseSource<T>,
    t: T,
    dt: T,
) -> SensorReading<T> {
    let sig = *noise.sigmas();
    let n_psi = noise.sample(sig.heading);
    let n_gyro = noise.sample(sig.gyro);
    let n_acc = noise.sample(sig.accel);
    let n_speed = noise.sample(sig.speed);
    let n_x = noise.sample(sig.position);
    let n_y = noise.sample(sig.position);
    SensorReading {
        psi_meas: wrap_angle(wrap_angle(state.psi + faults.heading_offset(t)) + n_psi),
        gyro_rate: state.r + n_gyro,
        accel_x: (state.u - prev_u) / dt + n_acc,
        speed_meas: state.u + n_speed,
        position_meas: (state.x + n_x, state.y + n_y),
        t,
    }
}
