use crate::error::{Result, SimError};
use crate::scalar::{lit, to_f64, Scalar};

/// One classical fourth-order Runge-Kutta step of `dx/dt = deriv(t, x)`.
///
/// Fails with [`SimError::Integration`] (carrying the stage time) as soon as
/// any stage evaluation yields a non-finite component.
pub fn rk4_step<T, const N: usize, F>(state: &[T; N], t: T, dt: T, mut deriv: F) -> Result<[T; N]>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    if !(dt > T::zero()) {
        return Err(SimError::config("dt", "must be positive"));
    }
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let six = lit::<T>(6.0);

    let mut eval = |ts: T, x: &[T; N]| -> Result<[T; N]> {
        let d = deriv(ts, x);
        if d.iter().all(|v| v.is_finite()) {
            Ok(d)
        } else {
            Err(SimError::Integration { t: to_f64(ts) })
        }
    };
    let offset = |x: &[T; N], k: &[T; N], h: T| -> [T; N] {
        let mut out = *x;
        for (o, ki) in out.iter_mut().zip(k) {
            *o += *ki * h;
        }
        out
    };

    let k1 = eval(t, state)?;
    let k2 = eval(t + dt * half, &offset(state, &k1, dt * half))?;
    let k3 = eval(t + dt * half, &offset(state, &k2, dt * half))?;
    let k4 = eval(t + dt, &offset(state, &k3, dt))?;

    let mut next = *state;
    for i in 0..N {
        next[i] += dt / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
    }
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_constant_derivative() {
        let x = rk4_step(&[1.0_f64], 0.0, 0.01, |_, _| [0.0]).unwrap();
        assert_eq!(x, [1.0]);
        let x = rk4_step(&[0.0_f64], 0.0, 0.01, |_, _| [1.0]).unwrap();
        assert!((x[0] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn exponential_decay_matches_closed_form() {
        let x = rk4_step(&[1.0_f64], 0.0, 0.01, |_, s| [-s[0]]).unwrap();
        assert!((x[0] - (-0.01_f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn exact_for_cubic_in_t() {
        // x' = 3t^2 - 2t + 1  =>  x(t) = t^3 - t^2 + t
        let f = |t: f64| t * t * t - t * t + t;
        let t0 = 0.7;
        let dt = 0.3;
        let x = rk4_step(&[f(t0)], t0, dt, |t, _| [3.0 * t * t - 2.0 * t + 1.0]).unwrap();
        assert!((x[0] - f(t0 + dt)).abs() < 1e-13);
    }

    #[test]
    fn non_finite_derivative_reports_time() {
        let err = rk4_step(&[1.0_f64], 2.0, 0.5, |t, _| [if t > 2.2 { f64::NAN } else { 0.0 }]).unwrap_err();
        assert_eq!(err, SimError::Integration { t: 2.25 });
    }

    #[test]
    fn rejects_bad_dt() {
        assert!(rk4_step(&[1.0_f64], 0.0, 0.0, |_, _| [0.0]).is_err());
    }
}
