//! Exact and series-based special-function primitives: Bernoulli numbers,
//! periodic Bernoulli functions, the Riemann zeta function, and the
//! small-argument series of K(s) = Y1(s/2) - H1(s/2) used to evaluate the
//! semi-infinite kernel integrals analytically.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Exact rational constant in reduced form with a positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RationalConstant {
    pub numerator: i64,
    pub denominator: i64,
}

impl RationalConstant {
    pub fn new(numerator: i64, denominator: i64) -> RationalConstant {
        assert!(denominator != 0);
        let sign = if denominator < 0 { -1 } else { 1 };
        let g = gcd(numerator.unsigned_abs(), denominator.unsigned_abs()) as i64;
        RationalConstant {
            numerator: sign * numerator / g,
            denominator: denominator.abs() / g,
        }
    }

    pub fn to_f64(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn value<T: Scalar>(self) -> T {
        T::from_f64(self.numerator as f64) / T::from_f64(self.denominator as f64)
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// (n, numerator, denominator) for the nonzero Bernoulli numbers up to B30.
const BERNOULLI_TABLE: &[(u32, i64, i64)] = &[
    (0, 1, 1),
    (1, -1, 2),
    (2, 1, 6),
    (4, -1, 30),
    (6, 1, 42),
    (8, -1, 30),
    (10, 5, 66),
    (12, -691, 2730),
    (14, 7, 6),
    (16, -3617, 510),
    (18, 43867, 798),
    (20, -174611, 330),
    (22, 854513, 138),
    (24, -236364091, 2730),
    (26, 8553103, 6),
    (28, -23749461029, 870),
    (30, 8615841276005, 14322),
];

/// Exact Bernoulli number B_r from the table (even r up to 30; odd r > 1 is zero).
pub fn bernoulli_number(r: u32) -> Result<RationalConstant> {
    if r > 30 {
        return Err(Error::UnsupportedOrder { order: r as usize, max: 30 });
    }
    if r % 2 == 1 && r > 1 {
        return Ok(RationalConstant::new(0, 1));
    }
    for &(n, num, den) in BERNOULLI_TABLE {
        if n == r {
            return Ok(RationalConstant::new(num, den));
        }
    }
    unreachable!()
}

fn binomial(n: u32, k: u32) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Periodic Bernoulli function P_k(x) = B~_k(x - floor(x)).
pub fn periodic_bernoulli(k: u32, x: f64) -> Result<f64> {
    if k == 0 || k > 30 {
        return Err(Error::Domain(format!("periodic Bernoulli order {k} outside 1..=30")));
    }
    let t = x - x.floor();
    // B~_k(t) = sum_j C(k,j) B_j t^{k-j}, evaluated by Horner in t.
    let mut acc = 0.0;
    for j in 0..=k {
        let b = bernoulli_number(j)?.to_f64();
        acc = acc * t + binomial(k, j) * b;
    }
    Ok(acc)
}

/// Riemann zeta at integer k >= 2, to at least 12 significant digits.
///
/// Even arguments use the closed form via B_{2n}; odd arguments use direct
/// summation with an Euler-Maclaurin tail.
pub fn riemann_zeta(k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::Domain(format!("zeta({k}) outside k >= 2")));
    }
    if k % 2 == 0 && k <= 30 {
        // zeta(2n) = (-1)^{n+1} B_{2n} (2 pi)^{2n} / (2 (2n)!)
        let n = k / 2;
        let b = bernoulli_number(k)?.to_f64();
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let mut pow = 1.0;
        let mut fact = 1.0;
        for i in 1..=k {
            pow *= 2.0 * std::f64::consts::PI;
            fact *= i as f64;
        }
        return Ok(sign * b * pow / (2.0 * fact));
    }
    let n = 40u32;
    let mut s = 0.0;
    for i in 1..n {
        s += (i as f64).powi(-(k as i32));
    }
    // tail: N^{1-k}/(k-1) + N^{-k}/2 + k N^{-k-1}/12 - k(k+1)(k+2) N^{-k-3}/720
    let nf = n as f64;
    let kf = k as f64;
    s += nf.powi(1 - k as i32) / (kf - 1.0);
    s += 0.5 * nf.powi(-(k as i32));
    s += kf / 12.0 * nf.powi(-(k as i32) - 1);
    s -= kf * (kf + 1.0) * (kf + 2.0) / 720.0 * nf.powi(-(k as i32) - 3);
    Ok(s)
}

/// ln Gamma(x) for x > 0: Stirling series with upward shift for small x.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma needs x > 0");
    let mut shift = 0.0;
    let mut z = x;
    while z < 12.0 {
        shift -= z.ln();
        z += 1.0;
    }
    let mut series = 0.0;
    let z2 = z * z;
    let mut zp = z;
    for r in 1..=6u32 {
        let b = bernoulli_number(2 * r).unwrap().to_f64();
        series += b / ((2 * r * (2 * r - 1)) as f64 * zp);
        zp *= z2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series + shift
}

/// One term `(a + b ln s) s^power` of a generalized power series.
#[derive(Clone, Copy, Debug)]
pub struct LogTerm<T: Scalar> {
    pub power: i32,
    pub a: T,
    pub b: T,
}

/// Finite series sum_k (a_k + b_k ln s) s^k with integer powers (possibly
/// negative). Closed under differentiation and power shifts, which is how
/// the kernel integrals I^{1,1}, I^{1,-1}, I^{3,1} on (0,inf) are produced
/// from the K series.
#[derive(Clone, Debug)]
pub struct LogSeries<T: Scalar> {
    pub terms: Vec<LogTerm<T>>,
}

impl<T: Scalar> LogSeries<T> {
    pub fn new() -> LogSeries<T> {
        LogSeries { terms: Vec::new() }
    }

    pub fn push(&mut self, power: i32, a: T, b: T) {
        for t in &mut self.terms {
            if t.power == power {
                t.a = t.a + a;
                t.b = t.b + b;
                return;
            }
        }
        self.terms.push(LogTerm { power, a, b });
    }

    pub fn eval(&self, s: T) -> T {
        let ln_s = s.ln();
        let mut acc = T::zero();
        for t in &self.terms {
            acc = acc + (t.a + t.b * ln_s) * s.powi(t.power);
        }
        acc
    }

    /// d/ds: (a + b ln s) s^j  ->  (j a + b + j b ln s) s^{j-1}.
    pub fn deriv(&self) -> LogSeries<T> {
        let mut out = LogSeries::new();
        for t in &self.terms {
            let j = T::from_f64(t.power as f64);
            out.push(t.power - 1, j * t.a + t.b, j * t.b);
        }
        out
    }

    /// Multiply by s^dp.
    pub fn shifted(&self, dp: i32) -> LogSeries<T> {
        LogSeries {
            terms: self.terms.iter().map(|t| LogTerm { power: t.power + dp, ..*t }).collect(),
        }
    }

    pub fn scaled(&self, c: T) -> LogSeries<T> {
        LogSeries {
            terms: self
                .terms
                .iter()
                .map(|t| LogTerm { power: t.power, a: t.a * c, b: t.b * c })
                .collect(),
        }
    }

    pub fn add(&self, rhs: &LogSeries<T>) -> LogSeries<T> {
        let mut out = self.clone();
        for t in &rhs.terms {
            out.push(t.power, t.a, t.b);
        }
        out
    }

    /// Coefficient pair (a, b) at a given power.
    pub fn coefficient(&self, power: i32) -> (T, T) {
        for t in &self.terms {
            if t.power == power {
                return (t.a, t.b);
            }
        }
        (T::zero(), T::zero())
    }
}

impl<T: Scalar> Default for LogSeries<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Ascending series of K(s) = Y1(s/2) - H1(s/2) as a LogSeries, keeping
/// series terms up to index `order` (argument range 0 < s <= 0.1; beyond the
/// small-argument regime the truncation error is no longer negligible).
///
/// Y1(x) = (2/pi) ln(x/2) J1(x) - 2/(pi x)
///         - (1/pi) sum_k [psi(k+1)+psi(k+2)] (-1)^k (x/2)^{2k+1} / (k!(k+1)!)
/// H1(x) = sum_k (-1)^k (x/2)^{2k+2} / (Gamma(k+3/2) Gamma(k+5/2))
///
/// with x = s/2, so (x/2) = s/4 and ln(x/2) = ln s - ln 4.
pub fn k_series<T: Scalar>(order: usize) -> LogSeries<T> {
    let pi = T::from_f64(std::f64::consts::PI) + T::from_f64(1.2246467991473532e-16);
    let gamma = T::from_f64(0.5772156649015329) + T::from_f64(-4.942915152430645e-18);
    let ln4 = (T::one() + T::one() + T::one() + T::one()).ln();
    let two = T::one() + T::one();

    let mut s = LogSeries::new();
    // -2/(pi x) = -4/(pi s)
    s.push(-1, -(two + two) / pi, T::zero());

    // factorials, harmonic numbers, quarter powers, Gamma(k+3/2)Gamma(k+5/2)
    let mut fact_k = T::one(); // k!
    let mut fact_k1 = T::one(); // (k+1)!
    let mut harm_k = T::zero(); // H_k
    let mut harm_k1 = T::one(); // H_{k+1}
    let mut q_odd = T::one() / (two + two); // (1/4)^{2k+1}
    let sixteenth = q_odd * q_odd;
    let mut gg = T::from_f64(3.0) * pi / T::from_f64(8.0); // Gamma(k+3/2)Gamma(k+5/2)
    let mut sign = T::one(); // (-1)^k

    for k in 0..=order {
        let kf = T::from_f64(k as f64);
        if k > 0 {
            fact_k = fact_k * kf;
            fact_k1 = fact_k1 * (kf + T::one());
            harm_k = harm_k + T::one() / kf;
            harm_k1 = harm_k1 + T::one() / (kf + T::one());
            q_odd = q_odd * sixteenth;
            gg = gg * (kf + T::one() / two) * (kf + T::from_f64(1.5));
            sign = -sign;
        }
        // odd power 2k+1 from the Y1 log and psi parts
        let base = sign * q_odd / (fact_k * fact_k1);
        let b = two / pi * base;
        let psi_sum = -(gamma + gamma) + harm_k + harm_k1;
        let a = -ln4 * b - base * psi_sum / pi;
        s.push(2 * k as i32 + 1, a, b);
        // even power 2k+2 from -H1
        let a_even = -sign * q_odd / (two + two) / gg;
        s.push(2 * k as i32 + 2, a_even, T::zero());
    }
    s
}

/// Truncated small-argument value of K(s); test oracle for the kernel
/// integral identities.
pub fn k_function_series(sigma: f64, order: usize) -> Result<f64> {
    if !(sigma > 0.0 && sigma <= 0.1) {
        return Err(Error::Regime(format!(
            "K series is a small-argument oracle, sigma = {sigma} outside (0, 0.1]"
        )));
    }
    if order > 8 {
        return Err(Error::UnsupportedOrder { order, max: 8 });
    }
    Ok(k_series::<f64>(order).eval(sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bernoulli_values() {
        assert_eq!(bernoulli_number(2).unwrap(), RationalConstant::new(1, 6));
        assert_eq!(bernoulli_number(4).unwrap(), RationalConstant::new(-1, 30));
        assert_eq!(bernoulli_number(12).unwrap(), RationalConstant::new(-691, 2730));
        assert_eq!(bernoulli_number(3).unwrap().numerator, 0);
        assert!(bernoulli_number(32).is_err());
    }

    #[test]
    fn bernoulli_recurrence() {
        // sum_{j=0}^{m} C(m+1, j) B_j = 0 for m >= 1 (relative to the
        // largest term; the late entries reach ~1e7 in magnitude)
        for m in 1..=29u32 {
            let mut acc = 0.0;
            let mut scale = 1.0f64;
            for j in 0..=m {
                let term = binomial(m + 1, j) * bernoulli_number(j).unwrap().to_f64();
                acc += term;
                scale = scale.max(term.abs());
            }
            assert!(acc.abs() < 1e-12 * scale, "recurrence fails at m={m}: {acc}");
        }
    }

    #[test]
    fn periodic_bernoulli_values() {
        assert!((periodic_bernoulli(1, 0.25).unwrap() + 0.25).abs() < 1e-15);
        assert!(periodic_bernoulli(3, 0.0).unwrap().abs() < 1e-15);
        // B~4(1/2) = 7/240 from the hand-expanded polynomial x^4 - 2x^3 + x^2 - 1/30
        let oracle = |x: f64| x.powi(4) - 2.0 * x.powi(3) + x.powi(2) - 1.0 / 30.0;
        assert!((periodic_bernoulli(4, 0.5).unwrap() - 7.0 / 240.0).abs() < 1e-15);
        assert!((periodic_bernoulli(4, 0.5).unwrap() - oracle(0.5)).abs() < 1e-15);
    }

    #[test]
    fn zeta_values() {
        let pi = std::f64::consts::PI;
        assert!((riemann_zeta(2).unwrap() - pi * pi / 6.0).abs() < 1e-14);
        assert!((riemann_zeta(4).unwrap() - pi.powi(4) / 90.0).abs() < 1e-14);
        // direct-series oracle to 1e-13
        assert!((riemann_zeta(3).unwrap() - 1.202056903159594).abs() < 1e-13);
        assert!((riemann_zeta(5).unwrap() - 1.0369277551433699).abs() < 1e-13);
        assert!((riemann_zeta(7).unwrap() - 1.0083492773819228).abs() < 1e-13);
        assert!(riemann_zeta(1).is_err());
    }

    #[test]
    fn ln_gamma_values() {
        // Gamma(5) = 24, Gamma(1/2) = sqrt(pi), Gamma(3/2) = sqrt(pi)/2
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
        let g32 = ln_gamma(1.5).exp();
        assert!((g32 - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
    }

    #[test]
    fn k_series_matches_reference_values() {
        // reference values of K and derivatives at s = 0.01 (50-digit evaluation
        // of Y1(s/2) - H1(s/2))
        let ks = k_series::<f64>(8);
        let k_val = ks.eval(0.01);
        assert!((k_val - -127.3333725649697670876).abs() < 1e-10 * 127.0);
        let k1 = ks.deriv().eval(0.01);
        assert!((k1 - 12731.61226876722211026).abs() < 1e-10 * k1.abs());
        let k3 = ks.deriv().deriv().deriv().eval(0.01);
        assert!((k3 - 763942135.4360389577106).abs() < 1e-9 * k3.abs());
    }

    #[test]
    fn k_leading_behaviour() {
        // K(s) -> -4/(pi s) as s -> 0+
        let s = 1e-6;
        let v = k_function_series(s, 8).unwrap();
        let lead = -4.0 / (std::f64::consts::PI * s);
        assert!((v / lead - 1.0).abs() < 1e-4);
        assert!(k_function_series(0.5, 8).is_err());
        assert!(k_function_series(0.01, 9).is_err());
    }

    proptest! {
        #[test]
        fn periodic_bernoulli_bound(k in 1u32..=9, x in 0.0f64..3.0) {
            // |P_k(x)| <= 2 k! zeta(k) / (2 pi)^k; zeta(1) is formally infinite
            // so the k = 1 bound uses the trivial |P_1| <= 1/2.
            let v = periodic_bernoulli(k, x).unwrap();
            let bound = if k == 1 {
                0.5 + 1e-12
            } else {
                let mut fact = 1.0;
                for i in 2..=k { fact *= i as f64; }
                2.0 * fact * riemann_zeta(k).unwrap()
                    / (2.0 * std::f64::consts::PI).powi(k as i32)
            };
            prop_assert!(v.abs() <= bound + 1e-12);
        }

        #[test]
        fn periodic_bernoulli_periodicity(k in 1u32..=9, x in 0.0f64..2.0) {
            let a = periodic_bernoulli(k, x).unwrap();
            let b = periodic_bernoulli(k, x + 1.0).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
