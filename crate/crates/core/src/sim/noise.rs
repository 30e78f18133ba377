use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::{impl_cast, lit, Scalar};

/// Per-channel standard deviations of the additive Gaussian sensor noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct NoiseSigmas<T> {
    /// Heading output, rad.
    pub heading: T,
    /// Gyro yaw rate, rad/s.
    pub gyro: T,
    /// Forward acceleration, m/s^2.
    pub accel: T,
    /// Forward speed, m/s.
    pub speed: T,
    /// Each horizontal position coordinate, m.
    pub position: T,
}

impl_cast!(NoiseSigmas {
    heading,
    gyro,
    accel,
    speed,
    position
});

impl<T: Scalar> Default for NoiseSigmas<T> {
    fn default() -> Self {
        Self {
            heading: lit(0.0005),
            gyro: lit(0.2_f64.to_radians()),
            accel: lit(0.02),
            speed: lit(0.005),
            position: lit(0.001),
        }
    }
}

impl<T: Scalar> NoiseSigmas<T> {
    pub fn zero() -> Self {
        Self {
            heading: T::zero(),
            gyro: T::zero(),
            accel: T::zero(),
            speed: T::zero(),
            position: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("heading", self.heading),
            ("gyro", self.gyro),
            ("accel", self.accel),
            ("speed", self.speed),
            ("position", self.position),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(SimError::config(
                    format!("noise.sigma.{name}"),
                    "must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }
}

/// Seeded zero-mean Gaussian noise. Equal seeds give bitwise-equal streams.
#[derive(Debug, Clone)]
pub struct NoiseSource<T> {
    seed: u64,
    enabled: bool,
    sigmas: NoiseSigmas<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> NoiseSource<T> {
    pub fn new(seed: u64, sigmas: NoiseSigmas<T>) -> Result<Self> {
        sigmas.validate()?;
        Ok(Self {
            seed,
            enabled: true,
            sigmas,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// A source that returns exact zeros and never touches its generator.
    pub fn disabled() -> Self {
        Self {
            seed: 0,
            enabled: false,
            sigmas: NoiseSigmas::zero(),
            rng: ChaCha8Rng::seed_from_u64(0),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn sigmas(&self) -> &NoiseSigmas<T> {
        &self.sigmas
    }

    /// One draw of `N(0, sigma^2)`.
    pub fn sample(&mut self, sigma: T) -> T {
        if !self.enabled {
            return T::zero();
        }
        let z: f64 = StandardNormal.sample(&mut self.rng);
        lit::<T>(z) * sigma
    }
}
