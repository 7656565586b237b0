//! Field operations shared by `f64` and [`Mp`], so the moment and
//! determinant routines run unchanged at either precision.

use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::mp::Mp;

pub trait Real:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant carrying the precision of `self`.
    fn cst(&self, v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn is_zero(&self) -> bool;
    /// Unit roundoff at the precision of `self`.
    fn epsilon(&self) -> f64;

    fn zero_like(&self) -> Self {
        self.cst(0.0)
    }

    fn one_like(&self) -> Self {
        self.cst(1.0)
    }
}

impl Real for f64 {
    fn cst(&self, v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        libm::fabs(*self)
    }
    fn sqrt(&self) -> Self {
        libm::sqrt(*self)
    }
    fn exp(&self) -> Self {
        libm::exp(*self)
    }
    fn ln(&self) -> Self {
        libm::log(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn epsilon(&self) -> f64 {
        f64::EPSILON
    }
}

impl Real for Mp {
    fn cst(&self, v: f64) -> Self {
        Mp::cst(self, v)
    }
    fn to_f64(&self) -> f64 {
        Mp::to_f64(self)
    }
    fn abs(&self) -> Self {
        Mp::abs(self)
    }
    fn sqrt(&self) -> Self {
        Mp::sqrt(self)
    }
    fn exp(&self) -> Self {
        Mp::exp(self)
    }
    fn ln(&self) -> Self {
        Mp::ln(self)
    }
    fn is_zero(&self) -> bool {
        Mp::is_zero(self)
    }
    fn epsilon(&self) -> f64 {
        libm::ldexp(1.0, -(self.bits() as i32))
    }
}
