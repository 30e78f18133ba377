use crate::error::{Result, SimError};
use crate::scalar::{cast, Scalar};

/// Fixed-step simulation clock. Time is derived from the step index, never
/// accumulated, so `t == step_index * dt` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock<T> {
    dt: T,
    step_index: u64,
}

impl<T: Scalar> SimClock<T> {
    pub fn new(dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(SimError::config("dt", format!("must be positive and finite, got {dt}")));
        }
        Ok(Self { dt, step_index: 0 })
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step_index
    }

    pub fn t(&self) -> T {
        self.time_at(self.step_index)
    }

    pub fn time_at(&self, index: u64) -> T {
        cast::<f64, T>(index as f64) * self.dt
    }

    pub fn tick(&mut self) {
        self.step_index += 1;
    }
}
