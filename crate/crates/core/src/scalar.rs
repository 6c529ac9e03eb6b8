//! Scalar abstraction for the numeric core.
//!
//! Everything in this crate is generic over a floating-point scalar so the
//! same code runs in `f32` or `f64`. Special functions (normal CDF and its
//! inverse) are evaluated internally in `f64` and converted back, which is
//! exact for `f64` and well below representation error for `f32`.

use statrs::distribution::{ContinuousCDF, Normal};

/// Floating-point scalar usable by the numeric core: `f32` or `f64`.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + num_traits::NumAssign
    + core::iter::Sum
    + core::fmt::Debug
    + core::fmt::Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from `f64` (`f32` rounds).
    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).expect("f64 converts to scalar")
    }

    /// Widening conversion to `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl<T> Real for T where
    T: num_traits::Float
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + num_traits::NumAssign
        + core::iter::Sum
        + core::fmt::Debug
        + core::fmt::Display
        + Send
        + Sync
        + 'static
{
}

fn unit_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

/// Standard normal CDF Φ(x).
pub fn standard_normal_cdf<S: Real>(x: S) -> S {
    S::from_f64_lossy(unit_normal().cdf(x.as_f64()))
}

/// Standard normal quantile Φ⁻¹(p) for p in (0, 1).
pub fn standard_normal_quantile<S: Real>(p: S) -> S {
    let p = p.as_f64();
    assert!(p > 0.0 && p < 1.0, "quantile argument must lie in (0, 1)");
    S::from_f64_lossy(unit_normal().inverse_cdf(p))
}

/// Mean of a slice. Empty input yields zero.
pub fn mean<S: Real>(values: &[S]) -> S {
    if values.is_empty() {
        return S::zero();
    }
    values.iter().copied().sum::<S>() / S::from_usize(values.len()).unwrap()
}

/// Population variance of a slice.
pub fn population_variance<S: Real>(values: &[S]) -> S {
    if values.is_empty() {
        return S::zero();
    }
    let m = mean(values);
    values
        .iter()
        .map(|&v| (v - m) * (v - m))
        .sum::<S>()
        / S::from_usize(values.len()).unwrap()
}
