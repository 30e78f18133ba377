use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar the simulation is generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

/// Converts an `f64` literal or parameter into `T`.
#[inline]
pub fn lit<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 value representable in scalar type")
}

/// Converts between scalar types (`f64 -> f32` rounds).
#[inline]
pub fn cast<T: Scalar, U: Scalar>(x: T) -> U {
    U::from(x).expect("scalar conversion")
}

#[inline]
pub fn to_f64<T: Scalar>(x: T) -> f64 {
    x.to_f64().expect("scalar to f64")
}

/// `tanh(x / width)`: a smooth stand-in for `signum` that is exactly zero at zero.
#[inline]
pub fn smooth_sign<T: Scalar>(x: T, width: T) -> T {
    (x / width).tanh()
}

/// Implements `cast::<U>()` for a struct whose listed fields are all of the
/// scalar parameter `T`; other fields are cloned.
macro_rules! impl_cast {
    ($name:ident { $($field:ident),* $(,)? } $(, copy { $($other:ident),* $(,)? })?) => {
        impl<T: $crate::scalar::Scalar> $name<T> {
            /// Converts every scalar field to another precision.
            pub fn cast<U: $crate::scalar::Scalar>(&self) -> $name<U> {
                $name {
                    $($field: $crate::scalar::cast(self.$field),)*
                    $($($other: self.$other.clone(),)*)?
                }
            }
        }
    };
}
pub(crate) use impl_cast;
