//! Scalar abstraction shared by every numerical module.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar the library is generic over (`f32`, `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Euler–Mascheroni constant.
    fn euler_gamma() -> Self {
        lit(0.577_215_664_901_532_9)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must be representable")
}

/// `i` in the working precision.
#[inline]
pub fn imag_unit<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), T::one())
}

/// Complex number from an `f64` pair.
#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

/// Embeds a real number in the complex plane.
#[inline]
pub fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

/// Value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T: Real> {
    pub value: Complex<T>,
    pub err: T,
}

impl<T: Real> Estimate<T> {
    pub fn new(value: Complex<T>, err: T) -> Self {
        Self { value, err }
    }

    pub fn exact(value: Complex<T>) -> Self {
        Self {
            value,
            err: T::zero(),
        }
    }

    /// Scales value and error by a complex factor.
    pub fn scale(self, factor: Complex<T>) -> Self {
        Self {
            value: self.value * factor,
            err: self.err * factor.norm(),
        }
    }
}

impl<T: Real> std::ops::Add for Estimate<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            value: self.value + rhs.value,
            err: self.err + rhs.err,
        }
    }
}

impl<T: Real> std::ops::Sub for Estimate<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            value: self.value - rhs.value,
            err: self.err + rhs.err,
        }
    }
}
