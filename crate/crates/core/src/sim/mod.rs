//! Numerical substrate shared by every simulation component: angle
//! arithmetic, the fixed-step clock, RK4 integration, discrete filters and
//! seeded sensor noise.

mod angle;
mod clock;
mod filter;
mod integrate;
mod noise;

pub use angle::{angle_diff, wrap_angle, wrap_angle_checked};
pub use clock::SimClock;
pub use filter::{FilterKind, FilterState};
pub use integrate::rk4_step;
pub use noise::{NoiseSigmas, NoiseSource};
