//! Scalar abstraction for the DSP and geometry core.

use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar the core math is generic over.
///
/// `f32` keeps render buffers small; `f64` is the default for the file
/// pipeline (see [`crate::Sample`]) where the tightest tolerances apply.
pub trait Float:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + rustfft::FftNum
    + Sum
    + Default
    + Debug
    + Display
{
    /// Lossy conversion from `f64`. Panics only on non-finite input that the
    /// target type cannot hold, which never happens for finite constants.
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to any Float")
    }

    /// Widen to `f64` for accumulation and reporting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Float converts to f64")
    }
}

impl Float for f32 {}
impl Float for f64 {}

/// Normalized sinc: `sin(pi x) / (pi x)`, with the removable singularity at 0.
pub fn sinc<T: Float>(x: T) -> T {
    let px = T::PI() * x;
    if px.abs() < T::cast(1e-12) {
        T::one()
    } else {
        px.sin() / px
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_at_integers() {
        assert!((sinc(0.0f64) - 1.0).abs() < 1e-15);
        for n in 1..10 {
            assert!(sinc(n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn cast_round_trips() {
        let x: f32 = Float::cast(0.25);
        assert_eq!(x, 0.25f32);
        assert_eq!(x.as_f64(), 0.25f64);
    }
}
