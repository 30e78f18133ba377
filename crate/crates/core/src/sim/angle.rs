use crate::error::{Result, SimError};
use crate::scalar::Scalar;

/// Reduces an angle to `[-pi, pi)`.
///
/// Non-finite input propagates as NaN; use [`wrap_angle_checked`] where a
/// domain error is wanted instead.
pub fn wrap_angle<T: Scalar>(theta: T) -> T {
    let two_pi = T::TAU();
    let pi = T::PI();
    let mut r = (theta + pi) % two_pi;
    if r < T::zero() {
        r += two_pi;
    }
    // `%` can land exactly on 2*pi after the shift when the input is a tiny
    // negative number; fold that back into range.
    if r >= two_pi {
        r -= two_pi;
    }
    r - pi
}

pub fn wrap_angle_checked<T: Scalar>(theta: T) -> Result<T> {
    if !theta.is_finite() {
        return Err(SimError::Domain(format!("cannot wrap non-finite angle {theta}")));
    }
    Ok(wrap_angle(theta))
}

/// Signed shortest rotation `a - b`, in `[-pi, pi)`.
pub fn angle_diff<T: Scalar>(a: T, b: T) -> T {
    wrap_angle(a - b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn examples() {
        assert_eq!(wrap_angle(0.0_f64), 0.0);
        assert!((wrap_angle(3.0 * PI) + PI).abs() < 1e-12);
        assert!((wrap_angle(-PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_angle(PI) + PI).abs() < 1e-15);
        assert!((wrap_angle(-PI) + PI).abs() < 1e-15);
    }

    #[test]
    fn non_finite_is_domain_error() {
        assert!(matches!(wrap_angle_checked(f64::NAN), Err(SimError::Domain(_))));
        assert!(wrap_angle_checked(f64::INFINITY).is_err());
    }

    #[test]
    fn diff_takes_short_way_round() {
        let d = angle_diff(PI - 0.01, -PI + 0.01);
        assert!((d + 0.02).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn periodic_and_in_range(theta in -50.0..50.0_f64, k in -20i32..20) {
            let a = wrap_angle(theta);
            let b = wrap_angle(theta + 2.0 * PI * f64::from(k));
            prop_assert!((-PI..PI).contains(&a));
            // Equal modulo 2*pi; compare on the circle so +-pi boundary cases agree.
            prop_assert!(angle_diff(a, b).abs() < 1e-12);
            let turns = (theta - a) / (2.0 * PI);
            prop_assert!((turns - turns.round()).abs() < 1e-9);
        }
    }
}
