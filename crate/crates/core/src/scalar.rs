//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real field the simulation is generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in scalar type")
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// `exp(z) - 1` without cancellation for small `|z|`.
pub fn expm1_c<T: Real>(z: Complex<T>) -> Complex<T> {
    let half = (z.im * lit(0.5)).sin();
    let re = z.re.exp_m1() * z.im.cos() - lit::<T>(2.0) * half * half;
    Complex::new(re, z.re.exp() * z.im.sin())
}

/// `ln(n!)` by direct summation; exact enough for the photon numbers used here.
pub fn ln_factorial<T: Real>(n: usize) -> T {
    (2..=n).fold(T::zero(), |acc, k| acc + lit::<T>(k as f64).ln())
}

/// Magnitudes below this are flushed to zero.
pub fn underflow_floor<T: Real>() -> T {
    lit(1e-300)
}

#[inline]
pub(crate) fn flush<T: Real>(z: Complex<T>) -> Complex<T> {
    if z.norm() < underflow_floor() {
        Complex::new(T::zero(), T::zero())
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm1_matches_exp_away_from_zero() {
        let z = Complex::new(0.3_f64, -0.2);
        let d = expm1_c(z) - (z.exp() - 1.0);
        assert!(d.norm() < 1e-15);
    }

    #[test]
    fn expm1_small_argument_keeps_precision() {
        let z = Complex::new(-1.4e-6_f64, 0.0);
        let v = expm1_c(z).re;
        assert!((v - (-1.4e-6_f64).exp_m1()).abs() < 1e-21);
    }

    #[test]
    fn ln_factorial_small_values() {
        assert_eq!(ln_factorial::<f64>(0), 0.0);
        assert_eq!(ln_factorial::<f64>(1), 0.0);
        assert!((ln_factorial::<f64>(5) - 120f64.ln()).abs() < 1e-14);
    }
}
