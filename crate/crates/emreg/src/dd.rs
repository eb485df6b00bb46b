//! Double-double arithmetic (~31 significant digits).
//!
//! The regularized mode sums reach ~1e18 at the smallest regulator values
//! while the constant term must be resolved to ~1e-10 absolute, which is
//! out of reach for f64. All high-precision sampling and fitting runs on
//! this unevaluated-sum-of-two-doubles representation.

use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd { hi: 3.141592653589793, lo: 1.2246467991473532e-16 };
    pub const EULER_GAMMA: Dd = Dd { hi: 0.5772156649015329, lo: -4.942915152430645e-18 };
    pub const LN2: Dd = Dd { hi: 0.6931471805599453, lo: 2.3190468138462996e-17 };
    pub const SQRT2: Dd = Dd { hi: 1.4142135623730951, lo: -9.667293313452913e-17 };

    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    /// Exact ratio of two small integers.
    pub fn ratio(num: i64, den: i64) -> Dd {
        Dd::from_f64(num as f64) / Dd::from_f64(den as f64)
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        debug_assert!(self.hi > 0.0, "sqrt of negative Dd");
        // One dd Newton step on the f64 estimate: y + (a - y^2) / (2y).
        let y = Dd::from_f64(self.hi.sqrt());
        y + (self - y * y) / (Dd::from_f64(2.0) * y)
    }

    pub fn exp(self) -> Dd {
        // exp(a) = 2^m * exp(r), r = a - m ln2, |r| <= ln2/2.
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        let m = (self.hi / std::f64::consts::LN_2).round();
        let r = self - Dd::LN2 * Dd::from_f64(m);
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for k in 1..40 {
            term = term * r / Dd::from_f64(k as f64);
            sum = sum + term;
            if term.hi.abs() < 1e-36 * sum.hi.abs() {
                break;
            }
        }
        let scale = Dd::from_f64(f64::powi(2.0, m as i32));
        sum * scale
    }

    pub fn ln(self) -> Dd {
        debug_assert!(self.hi > 0.0, "ln of non-positive Dd");
        // Newton on exp: y <- y + x*exp(-y) - 1, twice.
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp() - Dd::ONE;
        }
        y
    }

    pub fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { Dd::ONE / self } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// x^p for real p via exp(p ln x); x must be positive.
    pub fn powf(self, p: Dd) -> Dd {
        (self.ln() * p).exp()
    }

    pub fn recip(self) -> Dd {
        Dd::ONE / self
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd::from_parts(s, e + q3)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_identities() {
        let a = Dd::from_f64(1.0) / Dd::from_f64(3.0);
        let b = a * Dd::from_f64(3.0) - Dd::ONE;
        assert!(b.to_f64().abs() < 1e-31);

        let c = Dd::ratio(1, 7) + Dd::ratio(2, 7) + Dd::ratio(4, 7) - Dd::ONE;
        assert!(c.to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_two() {
        let r = Dd::from_f64(2.0).sqrt() - Dd::SQRT2;
        assert!(r.to_f64().abs() < 1e-31);
    }

    #[test]
    fn exp_and_ln() {
        // exp(1) = 2.718281828459045235360287471352662497757...
        let e = Dd::ONE.exp();
        let expect = Dd::from_parts(2.718281828459045, 2.3536028747135266e-16);
        assert!((e - expect).to_f64().abs() < 1e-30);

        let x = Dd::from_f64(0.37);
        let r = x.exp().ln() - x;
        assert!(r.to_f64().abs() < 1e-30);

        let l2 = Dd::from_f64(2.0).ln() - Dd::LN2;
        assert!(l2.to_f64().abs() < 1e-31);

        // large-magnitude round trip used by the regulator tails
        let y = Dd::from_f64(-40.25);
        let r2 = y.exp().ln() - y;
        assert!(r2.to_f64().abs() < 1e-28);
    }

    #[test]
    fn powi_matches_repeated_mul() {
        let x = Dd::from_f64(1.0) / Dd::from_f64(20000.0);
        let p4 = x.powi(-4);
        let m = (Dd::ONE / x) * (Dd::ONE / x) * (Dd::ONE / x) * (Dd::ONE / x);
        assert!(((p4 - m) / m).to_f64().abs() < 1e-30);
    }
}
