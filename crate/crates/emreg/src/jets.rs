//! Truncated Taylor series ("jets") for exact high-order derivatives.
//!
//! The boundary corrections S_m need odd derivatives of the summand up to
//! order 2m-1 (order 15 at m = 8). Finite differences lose all accuracy at
//! those orders; propagating Taylor coefficients through the closed-form
//! expressions is exact to working precision.

use crate::scalar::Scalar;

/// Taylor coefficients `c[k] = f^(k)(x0)/k!` up to a fixed truncation order.
#[derive(Clone, Debug)]
pub struct Jet<T: Scalar> {
    pub c: Vec<T>,
}

impl<T: Scalar> Jet<T> {
    /// The identity variable `x` expanded at `x0`.
    pub fn variable(x0: T, len: usize) -> Jet<T> {
        let mut c = vec![T::zero(); len];
        c[0] = x0;
        if len > 1 {
            c[1] = T::one();
        }
        Jet { c }
    }

    pub fn constant(v: T, len: usize) -> Jet<T> {
        let mut c = vec![T::zero(); len];
        c[0] = v;
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    /// k-th derivative: `k! * c[k]`.
    pub fn derivative(&self, k: usize) -> T {
        let mut f = T::one();
        for i in 2..=k {
            f = f * T::from_f64(i as f64);
        }
        self.c[k] * f
    }

    pub fn add(&self, rhs: &Jet<T>) -> Jet<T> {
        let c = self.c.iter().zip(&rhs.c).map(|(&a, &b)| a + b).collect();
        Jet { c }
    }

    pub fn sub(&self, rhs: &Jet<T>) -> Jet<T> {
        let c = self.c.iter().zip(&rhs.c).map(|(&a, &b)| a - b).collect();
        Jet { c }
    }

    pub fn scale(&self, s: T) -> Jet<T> {
        Jet { c: self.c.iter().map(|&a| a * s).collect() }
    }

    pub fn shift(&self, s: T) -> Jet<T> {
        let mut c = self.c.clone();
        c[0] = c[0] + s;
        Jet { c }
    }

    pub fn mul(&self, rhs: &Jet<T>) -> Jet<T> {
        let n = self.len();
        let mut c = vec![T::zero(); n];
        for k in 0..n {
            let mut acc = T::zero();
            for i in 0..=k {
                acc = acc + self.c[i] * rhs.c[k - i];
            }
            c[k] = acc;
        }
        Jet { c }
    }

    pub fn sqrt(&self) -> Jet<T> {
        let n = self.len();
        let mut s = vec![T::zero(); n];
        s[0] = self.c[0].sqrt();
        let two_s0 = (T::one() + T::one()) * s[0];
        for k in 1..n {
            let mut acc = T::zero();
            for i in 1..k {
                acc = acc + s[i] * s[k - i];
            }
            s[k] = (self.c[k] - acc) / two_s0;
        }
        Jet { c: s }
    }

    pub fn exp(&self) -> Jet<T> {
        let n = self.len();
        let mut e = vec![T::zero(); n];
        e[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + T::from_f64(j as f64) * self.c[j] * e[k - j];
            }
            e[k] = acc / T::from_f64(k as f64);
        }
        Jet { c: e }
    }

    pub fn recip(&self) -> Jet<T> {
        let n = self.len();
        let mut r = vec![T::zero(); n];
        r[0] = T::one() / self.c[0];
        for k in 1..n {
            let mut acc = T::zero();
            for i in 1..=k {
                acc = acc + self.c[i] * r[k - i];
            }
            r[k] = -r[0] * acc;
        }
        Jet { c: r }
    }
}
