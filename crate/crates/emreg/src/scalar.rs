//! Minimal scalar abstraction so the Taylor-jet and least-squares code can
//! run in either f64 or double-double precision.

use crate::dd::Dd;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> f64 {
        0.0
    }
    fn one() -> f64 {
        1.0
    }
    fn from_f64(x: f64) -> f64 {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn powi(self, n: i32) -> f64 {
        f64::powi(self, n)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for Dd {
    fn zero() -> Dd {
        Dd::ZERO
    }
    fn one() -> Dd {
        Dd::ONE
    }
    fn from_f64(x: f64) -> Dd {
        Dd::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        Dd::to_f64(self)
    }
    fn abs(self) -> Dd {
        Dd::abs(self)
    }
    fn sqrt(self) -> Dd {
        Dd::sqrt(self)
    }
    fn exp(self) -> Dd {
        Dd::exp(self)
    }
    fn ln(self) -> Dd {
        Dd::ln(self)
    }
    fn powi(self, n: i32) -> Dd {
        Dd::powi(self, n)
    }
    fn is_finite(self) -> bool {
        Dd::is_finite(self)
    }
}
