//! Residual generation, adaptive and static thresholds, and the debounced
//! detection rule.
//!
//! The adaptive threshold of one residual channel is
//!
//! ```text
//! th_c = c
//! th_d = k_d |HP(R)|
//! th_l = k_l (1 - H) |R|
//! dR_tol = LP(th_c + th_d + th_l)
//! ```
//!
//! so it widens when the residual moves quickly or when health drops.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::{cast, lit, Scalar};
use crate::sim::{wrap_angle, FilterKind, FilterState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Heading,
    Velocity,
}

impl Channel {
    pub const ALL: [Channel; 2] = [Channel::Heading, Channel::Velocity];
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Heading => "heading",
            Channel::Velocity => "velocity",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Adaptive,
    Static,
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DetectorKind::Adaptive => "adaptive",
            DetectorKind::Static => "static",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ResidualSample<T> {
    /// Observer heading minus measured heading, wrapped.
    pub r_psi: T,
    /// Observer speed minus measured speed.
    pub r_v: T,
    pub t: T,
}

impl<T: Scalar> ResidualSample<T> {
    pub fn get(&self, channel: Channel) -> T {
        match channel {
            Channel::Heading => self.r_psi,
            Channel::Velocity => self.r_v,
        }
    }
}

pub fn residuals<T: Scalar>(observer: (T, T), measured: (T, T), t: T) -> ResidualSample<T> {
    ResidualSample {
        r_psi: wrap_angle(observer.0 - measured.0),
        r_v: observer.1 - measured.1,
        t,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ChannelThresholdConfig<T> {
    /// Constant component `c`, in residual units.
    pub c: T,
    /// Gain on the high-passed residual magnitude.
    pub k_d: T,
    /// Gain on the health-scaled residual magnitude.
    pub k_l: T,
    /// Baseline static threshold; `None` leaves the channel unconfigured.
    #[serde(default)]
    pub static_threshold: Option<T>,
}

impl<T: Scalar> ChannelThresholdConfig<T> {
    pub fn cast<U: Scalar>(&self) -> ChannelThresholdConfig<U> {
        ChannelThresholdConfig {
            c: cast(self.c),
            k_d: cast(self.k_d),
            k_l: cast(self.k_l),
            static_threshold: self.static_threshold.map(cast),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.c > T::zero()) || !self.c.is_finite() {
            return Err(SimError::config(format!("thresholds.{name}.c"), "must be positive"));
        }
        for (field, v) in [("k_d", self.k_d), ("k_l", self.k_l)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(SimError::config(
                    format!("thresholds.{name}.{field}"),
                    "must be finite and >= 0",
                ));
            }
        }
        if let Some(s) = self.static_threshold {
            if !(s >= T::zero()) || !s.is_finite() {
                return Err(SimError::config(
                    format!("thresholds.{name}.static_threshold"),
                    "must be finite and >= 0",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct ThresholdConfig<T> {
    pub heading: ChannelThresholdConfig<T>,
    pub velocity: ChannelThresholdConfig<T>,
    pub highpass_hz: T,
    pub lowpass_hz: T,
    /// Consecutive exceedances needed to raise (and non-exceedances to clear) an alarm.
    pub debounce_n: u32,
}

impl<T: Scalar> Default for ThresholdConfig<T> {
    fn default() -> Self {
        Self {
            heading: ChannelThresholdConfig {
                c: lit(0.05),
                k_d: lit(2.0),
                k_l: lit(1.0),
                static_threshold: Some(lit(0.1)),
            },
            velocity: ChannelThresholdConfig {
                c: lit(0.03),
                k_d: lit(2.0),
                k_l: lit(1.0),
                static_threshold: Some(lit(0.05)),
            },
            highpass_hz: lit(0.5),
            lowpass_hz: lit(0.2),
            debounce_n: 3,
        }
    }
}

impl<T: Scalar> ThresholdConfig<T> {
    pub fn cast<U: Scalar>(&self) -> ThresholdConfig<U> {
        ThresholdConfig {
            heading: self.heading.cast(),
            velocity: self.velocity.cast(),
            highpass_hz: cast(self.highpass_hz),
            lowpass_hz: cast(self.lowpass_hz),
            debounce_n: self.debounce_n,
        }
    }

    pub fn channel(&self, channel: Channel) -> &ChannelThresholdConfig<T> {
        match channel {
            Channel::Heading => &self.heading,
            Channel::Velocity => &self.velocity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.heading.validate("heading")?;
        self.velocity.validate("velocity")?;
        if self.debounce_n == 0 {
            return Err(SimError::config("thresholds.debounce_n", "must be at least 1"));
        }
        Ok(())
    }
}

/// The configured static threshold of a channel.
pub fn static_threshold<T: Scalar>(cfg: &ThresholdConfig<T>, channel: Channel) -> Result<T> {
    cfg.channel(channel).static_threshold.ok_or_else(|| {
        SimError::config(
            format!("thresholds.{channel}.static_threshold"),
            "no static threshold configured for this channel",
        )
    })
}

/// Adaptive threshold generator for one residual channel.
#[derive(Debug, Clone)]
pub struct ThresholdChannel<T> {
    pub c: T,
    pub k_d: T,
    pub k_l: T,
    hp: FilterState<T>,
    lp: FilterState<T>,
    delta_r_tol: T,
    primed: bool,
}

impl<T: Scalar> ThresholdChannel<T> {
    pub fn new(cfg: &ChannelThresholdConfig<T>, highpass_hz: T, lowpass_hz: T, dt: T) -> Result<Self> {
        Ok(Self {
            c: cfg.c,
            k_d: cfg.k_d,
            k_l: cfg.k_l,
            hp: FilterState::new(FilterKind::HighPass1, highpass_hz, dt)?,
            lp: FilterState::new(FilterKind::LowPass1, lowpass_hz, dt)?,
            delta_r_tol: cfg.c,
            primed: false,
        })
    }

    pub fn delta_r_tol(&self) -> T {
        self.delta_r_tol
    }

    pub fn lowpass(&self) -> &FilterState<T> {
        &self.lp
    }

    /// `th_c + th_d + th_l` for a given high-passed residual.
    pub fn pre_filter_sum(&self, highpassed: T, r: T, h: T) -> T {
        let h = h.max(T::zero()).min(T::one());
        self.c + self.k_d * highpassed.abs() + self.k_l * (T::one() - h) * r.abs()
    }

    /// Advances both filters and returns the new `dR_tol`. The first call
    /// starts the filters in steady state on the first residual.
    pub fn step(&mut self, r: T, h: T) -> T {
        let hp = if self.primed {
            self.hp.step(r)
        } else {
            self.hp.prime(r);
            T::zero()
        };
        let sum = self.pre_filter_sum(hp, r, h);
        self.delta_r_tol = if self.primed {
            self.lp.step(sum)
        } else {
            self.lp.prime(sum);
            sum
        };
        self.primed = true;
        self.delta_r_tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent<T> {
    pub t: T,
    pub channel: Channel,
    pub residual_value: T,
    pub threshold_value: T,
    pub detector: DetectorKind,
}

impl<T: Scalar> DetectionEvent<T> {
    pub fn cast<U: Scalar>(&self) -> DetectionEvent<U> {
        DetectionEvent {
            t: cast(self.t),
            channel: self.channel,
            residual_value: cast(self.residual_value),
            threshold_value: cast(self.threshold_value),
            detector: self.detector,
        }
    }
}

/// Alarm transitions emitted by a detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlarmEvent<T> {
    Raised(DetectionEvent<T>),
    Cleared {
        t: T,
        channel: Channel,
        detector: DetectorKind,
    },
}

/// Debounced two-sided threshold test for one channel and detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectorState {
    pub consecutive_exceed: u32,
    pub consecutive_clear: u32,
    pub debounce_n: u32,
    pub active_alarm: bool,
}

impl DetectorState {
    pub fn new(debounce_n: u32) -> Self {
        Self {
            consecutive_exceed: 0,
            consecutive_clear: 0,
            debounce_n: debounce_n.max(1),
            active_alarm: false,
        }
    }

    pub fn detect<T: Scalar>(
        &mut self,
        r: T,
        threshold: T,
        channel: Channel,
        detector: DetectorKind,
        t: T,
    ) -> Option<AlarmEvent<T>> {
        if r.abs() > threshold {
            self.consecutive_exceed += 1;
            self.consecutive_clear = 0;
            if !self.active_alarm && self.consecutive_exceed >= self.debounce_n {
                self.active_alarm = true;
                return Some(AlarmEvent::Raised(DetectionEvent {
                    t,
                    channel,
                    residual_value: r,
                    threshold_value: threshold,
                    detector,
                }));
            }
        } else {
            self.consecutive_exceed = 0;
            self.consecutive_clear += 1;
            if self.active_alarm && self.consecutive_clear >= self.debounce_n {
                self.active_alarm = false;
                return Some(AlarmEvent::Cleared { t, channel, detector });
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn channel(k_d: f64, k_l: f64) -> ThresholdChannel<f64> {
        let cfg = ChannelThresholdConfig {
            c: 0.05,
            k_d,
            k_l,
            static_threshold: None,
        };
        ThresholdChannel::new(&cfg, 0.5, 0.2, 0.01).unwrap()
    }

    #[test]
    fn residual_examples() {
        assert_eq!(
            residuals((0.3, 0.25), (0.3, 0.25), 1.0),
            ResidualSample {
                r_psi: 0.0,
                r_v: 0.0,
                t: 1.0
            }
        );
        let r = residuals((0.1745_f64, 0.25), (0.0, 0.25), 1.0);
        assert!((r.r_psi - 0.1745).abs() < 1e-15);
        let r = residuals((PI - 0.01, 0.0), (-PI + 0.01, 0.0), 1.0);
        assert!((r.r_psi + 0.02).abs() < 1e-12);
    }

    #[test]
    fn threshold_settles_to_constant_with_quiet_residual() {
        let mut ch = channel(2.0, 1.0);
        let mut th = 0.0;
        for _ in 0..2000 {
            th = ch.step(0.0, 1.0);
        }
        assert!((th - 0.05).abs() < 0.05 * 0.01);
    }

    #[test]
    fn threshold_ignores_constant_residual_at_full_health() {
        let mut ch = channel(2.0, 1.0);
        ch.step(0.0, 1.0);
        let mut th = 0.0;
        for _ in 0..3000 {
            th = ch.step(0.3, 1.0);
        }
        assert!((th - 0.05).abs() < 0.05 * 0.01, "{th}");
    }

    #[test]
    fn threshold_tracks_residual_when_health_drops() {
        // Step-response oracle: simulate the three paths separately and compare.
        let mut ch = channel(2.0, 1.0);
        let mut hp = FilterState::new(FilterKind::HighPass1, 0.5, 0.01).unwrap();
        let mut lp = FilterState::new(FilterKind::LowPass1, 0.2, 0.01).unwrap();
        hp.prime(0.0);
        lp.prime(0.05);
        ch.step(0.0, 1.0);
        let mut prev = ch.delta_r_tol();
        let mut peak: f64 = 0.0;
        for k in 0..1500 {
            let h = if k < 100 { 1.0 - 0.006 * k as f64 } else { 0.4 };
            let th = ch.step(0.2, h);
            let expected = lp.step(0.05 + 2.0 * hp.step(0.2_f64).abs() + (1.0 - h) * 0.2);
            assert!((th - expected).abs() < 1e-12);
            if k < 30 {
                assert!(th >= prev);
            }
            prev = th;
            peak = peak.max(th);
        }
        assert!(peak > 0.05 + 0.05);
        // Settles on c + (1 - h) |R| once the high-pass has decayed.
        assert!((prev - (0.05 + 0.6 * 0.2)).abs() < 1e-3);
    }

    #[test]
    fn zero_gains_reduce_to_static() {
        let mut ch = channel(0.0, 0.0);
        let mut th = 0.0;
        for k in 0..2000 {
            th = ch.step((k as f64 * 0.37).sin(), 0.2);
        }
        assert!((th - 0.05).abs() < 1e-12);
    }

    #[test]
    fn static_threshold_lookup() {
        let cfg = ThresholdConfig::<f64>::default();
        assert_eq!(static_threshold(&cfg, Channel::Heading).unwrap(), 0.1);
        assert_eq!(static_threshold(&cfg, Channel::Velocity).unwrap(), 0.05);
        let mut bare = cfg;
        bare.velocity.static_threshold = None;
        assert!(matches!(
            static_threshold(&bare, Channel::Velocity),
            Err(SimError::Config { .. })
        ));
    }

    #[test]
    fn detection_debounce() {
        let mut d = DetectorState::new(3);
        for k in 0..50 {
            assert!(d
                .detect(0.01, 0.05, Channel::Heading, DetectorKind::Adaptive, k as f64)
                .is_none());
        }

        let mut d = DetectorState::new(3);
        assert!(d
            .detect(0.1, 0.05, Channel::Heading, DetectorKind::Adaptive, 0.0)
            .is_none());
        assert!(d
            .detect(-0.1, 0.05, Channel::Heading, DetectorKind::Adaptive, 1.0)
            .is_none());
        match d.detect(0.1_f64, 0.05, Channel::Heading, DetectorKind::Adaptive, 2.0) {
            Some(AlarmEvent::Raised(e)) => {
                assert_eq!(e.t, 2.0);
                assert!(e.residual_value.abs() > e.threshold_value);
            }
            other => panic!("{other:?}"),
        }
        assert!(d
            .detect(0.1, 0.05, Channel::Heading, DetectorKind::Adaptive, 3.0)
            .is_none());

        let mut d = DetectorState::new(3);
        for k in 0..50 {
            let r = if k % 2 == 0 { 1.0 } else { 0.0 };
            assert!(d
                .detect(r, 0.05, Channel::Velocity, DetectorKind::Static, k as f64)
                .is_none());
        }
    }

    #[test]
    fn alarm_clears_after_debounce() {
        let mut d = DetectorState::new(3);
        for k in 0..3 {
            d.detect(1.0, 0.5, Channel::Heading, DetectorKind::Adaptive, k as f64);
        }
        assert!(d.active_alarm);
        assert!(d
            .detect(0.0, 0.5, Channel::Heading, DetectorKind::Adaptive, 3.0)
            .is_none());
        assert!(d
            .detect(0.0, 0.5, Channel::Heading, DetectorKind::Adaptive, 4.0)
            .is_none());
        assert!(matches!(
            d.detect(0.0, 0.5, Channel::Heading, DetectorKind::Adaptive, 5.0),
            Some(AlarmEvent::Cleared { t, .. }) if t == 5.0
        ));
        assert!(!d.active_alarm);
    }

    proptest! {
        #[test]
        fn heading_residual_is_2pi_invariant(a in -3.0..3.0_f64, b in -3.0..3.0_f64, k in -3i32..3) {
            let shift = 2.0 * PI * f64::from(k);
            let r0 = residuals((a, 0.0), (b, 0.0), 0.0).r_psi;
            let r1 = residuals((a + shift, 0.0), (b, 0.0), 0.0).r_psi;
            let r2 = residuals((a, 0.0), (b + shift, 0.0), 0.0).r_psi;
            prop_assert!(crate::sim::angle_diff(r0, r1).abs() < 1e-9);
            prop_assert!(crate::sim::angle_diff(r0, r2).abs() < 1e-9);
        }

        #[test]
        fn threshold_non_negative(rs in proptest::collection::vec(-5.0..5.0_f64, 1..200), h in 0.0..=1.0_f64) {
            let mut ch = channel(2.0, 1.0);
            for r in rs {
                prop_assert!(ch.step(r, h) >= 0.0);
            }
        }

        #[test]
        fn pre_filter_sum_non_increasing_in_health(hp in -2.0..2.0_f64, r in -2.0..2.0_f64, h1 in 0.0..=1.0_f64, h2 in 0.0..=1.0_f64) {
            let ch = channel(2.0, 1.0);
            let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
            prop_assert!(ch.pre_filter_sum(hp, r, lo) >= ch.pre_filter_sum(hp, r, hi));
        }
    }
}
