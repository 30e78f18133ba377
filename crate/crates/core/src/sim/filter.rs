use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    /// `wc / (s + wc)`
    LowPass1,
    /// `s / (s + wc)`
    HighPass1,
    /// Critically damped `wc^2 / (s + wc)^2`; `cutoff` is the double-pole frequency.
    LowPass2,
}

/// One first-order bilinear section: `y[n] = b0 x[n] + b1 x[n-1] - a1 y[n-1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Section<T> {
    b0: T,
    b1: T,
    a1: T,
    x1: T,
    y1: T,
}

impl<T: Scalar> Section<T> {
    fn step(&mut self, x: T) -> T {
        let y = self.b0 * x + self.b1 * self.x1 - self.a1 * self.y1;
        self.x1 = x;
        self.y1 = y;
        y
    }

    fn dc_gain(&self) -> T {
        (self.b0 + self.b1) / (T::one() + self.a1)
    }

    fn prime(&mut self, x: T) {
        self.x1 = x;
        self.y1 = self.dc_gain() * x;
    }
}

/// Discrete IIR filter obtained by the (pre-warped) bilinear transform of a
/// first- or second-order continuous prototype.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState<T> {
    kind: FilterKind,
    cutoff_hz: T,
    dt: T,
    sections: [Section<T>; 2],
    order: usize,
}

impl<T: Scalar> FilterState<T> {
    pub fn new(kind: FilterKind, cutoff_hz: T, dt: T) -> Result<Self> {
        if !(dt > T::zero()) || !dt.is_finite() {
            return Err(SimError::config("dt", "must be positive and finite"));
        }
        let nyquist = lit::<T>(0.5) / dt;
        if !(cutoff_hz > T::zero()) || !(cutoff_hz < nyquist) {
            return Err(SimError::config(
                "cutoff_hz",
                format!("{cutoff_hz} Hz must lie in (0, {nyquist}) Hz for dt = {dt} s"),
            ));
        }
        let w = (T::PI() * cutoff_hz * dt).tan();
        let norm = T::one() + w;
        let a1 = (w - T::one()) / norm;
        let (b0, b1) = match kind {
            FilterKind::LowPass1 | FilterKind::LowPass2 => (w / norm, w / norm),
            FilterKind::HighPass1 => (T::one() / norm, -T::one() / norm),
        };
        let section = Section {
            b0,
            b1,
            a1,
            x1: T::zero(),
            y1: T::zero(),
        };
        let order = if kind == FilterKind::LowPass2 { 2 } else { 1 };
        Ok(Self {
            kind,
            cutoff_hz,
            dt,
            sections: [section; 2],
            order,
        })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn cutoff_hz(&self) -> T {
        self.cutoff_hz
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Continuous-time constant `1 / (2 pi fc)` of the prototype poles.
    pub fn time_constant(&self) -> T {
        T::one() / (T::TAU() * self.cutoff_hz)
    }

    /// Advances the filter by one sample and returns the new output.
    pub fn step(&mut self, input: T) -> T {
        let mut y = input;
        for s in &mut self.sections[..self.order] {
            y = s.step(y);
        }
        y
    }

    /// Puts the filter in the steady state it would reach under a constant `input`.
    pub fn prime(&mut self, input: T) {
        let mut x = input;
        for s in &mut self.sections[..self.order] {
            s.prime(x);
            x = s.y1;
        }
    }

    pub fn output(&self) -> T {
        self.sections[self.order - 1].y1
    }

    pub fn is_finite(&self) -> bool {
        self.sections.iter().all(|s| s.x1.is_finite() && s.y1.is_finite())
    }
}
