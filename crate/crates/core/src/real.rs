//! Scalar abstraction over `f64` and [`DoubleDouble`] so the lattice solver
//! can run in either precision.

use std::fmt::{Debug, Display};
use std::ops::Neg;

use num_complex::Complex;
use num_traits::NumAssign;

use crate::dd::DoubleDouble;

/// Real scalar usable inside the block solver.
pub trait Real: Copy + Debug + Display + Default + PartialOrd + Send + Sync + NumAssign + Neg<Output = Self> + 'static {
    /// Unit roundoff of the format.
    const EPSILON: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;

    fn abs(self) -> Self {
        if self < Self::zero() {
            -self
        } else {
            self
        }
    }

    fn from_i64(n: i64) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Real for DoubleDouble {
    const EPSILON: f64 = 4.93038065763132e-32;

    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self.hi()
    }
    #[inline]
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
}

/// Complex number over a [`Real`] scalar.
pub type Cx<T> = Complex<T>;

#[inline]
pub fn cx<T: Real>(re: f64, im: f64) -> Cx<T> {
    Complex::new(T::from_f64(re), T::from_f64(im))
}

#[inline]
pub fn lift<T: Real>(z: num_complex::Complex64) -> Cx<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

#[inline]
pub fn lower<T: Real>(z: Cx<T>) -> num_complex::Complex64 {
    num_complex::Complex64::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn abs2<T: Real>(z: Cx<T>) -> T {
    z.re * z.re + z.im * z.im
}
