//! Symbolic `P(x, sigma) e^{-c sigma x}` forms for the homogeneous-cavity
//! auxiliary functions: polynomials in the index x whose coefficients are
//! Laurent polynomials in sigma. Differentiation in x, evaluation at an
//! integer start index, and extraction of the sigma-expansion constant term
//! are all exact, which is what makes the homogeneous "analytic path"
//! machine-precision.

use crate::scalar::Scalar;
use std::collections::BTreeMap;

/// Laurent polynomial in sigma: sum_k coeffs[k] sigma^k.
#[derive(Clone, Debug, Default)]
pub struct LaurentPoly<T: Scalar> {
    pub coeffs: BTreeMap<i32, T>,
}

impl<T: Scalar> LaurentPoly<T> {
    pub fn zero() -> Self {
        LaurentPoly { coeffs: BTreeMap::new() }
    }

    pub fn term(power: i32, c: T) -> Self {
        let mut p = Self::zero();
        p.push(power, c);
        p
    }

    pub fn push(&mut self, power: i32, c: T) {
        let slot = self.coeffs.entry(power).or_insert_with(T::zero);
        *slot = *slot + c;
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (&p, &c) in &rhs.coeffs {
            out.push(p, c);
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(&p, &c)| (p, c * s)).collect() }
    }

    /// Multiply by c sigma (used for d/dx of the exponential factor).
    pub fn mul_sigma(&self, c: T) -> Self {
        LaurentPoly { coeffs: self.coeffs.iter().map(|(&p, &v)| (p + 1, v * c)).collect() }
    }

    pub fn eval(&self, sigma: T) -> T {
        let mut acc = T::zero();
        for (&p, &c) in &self.coeffs {
            acc = acc + c * sigma.powi(p);
        }
        acc
    }

    pub fn coefficient(&self, power: i32) -> T {
        self.coeffs.get(&power).copied().unwrap_or_else(T::zero)
    }

    fn min_power(&self) -> i32 {
        self.coeffs.keys().next().copied().unwrap_or(0)
    }
}

/// `sum_k x^k * poly_k(sigma)` multiplied by `e^{-rate_c * sigma * x}`.
#[derive(Clone, Debug)]
pub struct PolyExp<T: Scalar> {
    /// x-power coefficients.
    pub poly: Vec<LaurentPoly<T>>,
    /// Decay constant c in e^{-c sigma x} (pi for the unit-regulator forms).
    pub rate_c: T,
}

impl<T: Scalar> PolyExp<T> {
    /// d/dx: Q'(x) - c sigma Q(x), same exponential factor.
    pub fn deriv_x(&self) -> PolyExp<T> {
        let deg = self.poly.len();
        let mut out = vec![LaurentPoly::zero(); deg + 1];
        for (k, pk) in self.poly.iter().enumerate() {
            if k >= 1 {
                out[k - 1] = out[k - 1].add(&pk.scale(T::from_f64(k as f64)));
            }
            out[k] = out[k].add(&pk.mul_sigma(self.rate_c).scale(-T::one()));
        }
        while out.len() > 1 && out.last().unwrap().coeffs.is_empty() {
            out.pop();
        }
        PolyExp { poly: out, rate_c: self.rate_c }
    }

    /// Collapse the x-polynomial at integer x = n (the exponential factor
    /// e^{-c sigma n} remains implicit; see [`ExpLaurent`]).
    pub fn at(&self, n: u32) -> ExpLaurent<T> {
        let nf = T::from_f64(n as f64);
        let mut acc = LaurentPoly::zero();
        let mut xp = T::one();
        for pk in &self.poly {
            acc = acc.add(&pk.scale(xp));
            xp = xp * nf;
        }
        ExpLaurent { rate: self.rate_c * nf, poly: acc }
    }
}

/// `poly(sigma) * e^{-rate * sigma}` with exact series bookkeeping.
#[derive(Clone, Debug)]
pub struct ExpLaurent<T: Scalar> {
    pub rate: T,
    pub poly: LaurentPoly<T>,
}

impl<T: Scalar> ExpLaurent<T> {
    pub fn zero() -> Self {
        ExpLaurent { rate: T::zero(), poly: LaurentPoly::zero() }
    }

    pub fn eval(&self, sigma: T) -> T {
        self.poly.eval(sigma) * (-self.rate * sigma).exp()
    }

    /// Two terms share the rate when they describe the same start index.
    pub fn add(&self, rhs: &Self) -> Self {
        debug_assert!((self.rate - rhs.rate).to_f64().abs() <= 1e-300 || self.poly.coeffs.is_empty() || rhs.poly.coeffs.is_empty());
        let rate = if self.poly.coeffs.is_empty() { rhs.rate } else { self.rate };
        ExpLaurent { rate, poly: self.poly.add(&rhs.poly) }
    }

    pub fn scale(&self, s: T) -> Self {
        ExpLaurent { rate: self.rate, poly: self.poly.scale(s) }
    }

    /// Coefficient of sigma^power in the full expansion
    /// e^{-rate sigma} * poly(sigma) = sum_j (-rate)^j sigma^j / j! * poly.
    pub fn series_coefficient(&self, power: i32) -> T {
        let min_p = self.poly.min_power();
        let mut acc = T::zero();
        let mut rate_pow = T::one(); // (-rate)^j / j!
        let mut j: i32 = 0;
        loop {
            let need = power - j;
            if need < min_p {
                break;
            }
            acc = acc + self.poly.coefficient(need) * rate_pow;
            j += 1;
            rate_pow = rate_pow * (-self.rate) / T::from_f64(j as f64);
        }
        acc
    }
}
