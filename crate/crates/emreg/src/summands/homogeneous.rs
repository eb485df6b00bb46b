//! Auxiliary summand families for the homogeneous cuboid cavity.
//!
//! With the exponential regulator e^{-sigma Omega} the continuum-limit
//! energy and integrated-stress summands have elementary closed forms
//! (c = pi sigma):
//!
//!   F(x)    = (4/c^2 + 4x/c + 2x^2) e^{-c x} / c
//!   Fbar(x) = 2 x^2 e^{-c x} / c
//!   int_n^inf F    = (12/c^2 + 8n/c + 2n^2) e^{-c n} / c^2
//!   int_n^inf Fbar = (4/c^2 + 4n/c + 2n^2) e^{-c n} / c^2
//!
//! The TE sums start at nz = 1, the TM sums at nz = 0. A quadratic
//! regulator variant e^{-sigma Omega^2} is provided to exercise the
//! regulator-power independence of the extracted constants.

use super::polyexp::{ExpLaurent, LaurentPoly, PolyExp};
use crate::calculus::{self, QuadratureResult};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::euler_maclaurin::SummandFamily;
use crate::jets::Jet;
use crate::scalar::Scalar;
use crate::spectra::Sector;
use crate::special::bernoulli_number;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Energy,
    Stress,
}

/// Homogeneous-cavity family with the linear regulator e^{-sigma Omega}.
#[derive(Clone, Copy, Debug)]
pub struct CuboidFamily {
    pub sector: Sector,
    pub quantity: Quantity,
}

impl CuboidFamily {
    pub fn new(sector: Sector, quantity: Quantity) -> Self {
        CuboidFamily { sector, quantity }
    }

    /// Summand as a symbolic polynomial-times-exponential in x.
    fn summand_sym<T: Scalar>(&self) -> PolyExp<T> {
        let pi = T::from_f64(std::f64::consts::PI) + T::from_f64(1.2246467991473532e-16);
        let poly = match self.quantity {
            Quantity::Energy => vec![
                // 4/(pi^3 s^3) + 4x/(pi^2 s^2) + 2x^2/(pi s)
                LaurentPoly::term(-3, T::from_f64(4.0) / pi.powi(3)),
                LaurentPoly::term(-2, T::from_f64(4.0) / pi.powi(2)),
                LaurentPoly::term(-1, T::from_f64(2.0) / pi),
            ],
            Quantity::Stress => vec![
                LaurentPoly::zero(),
                LaurentPoly::zero(),
                LaurentPoly::term(-1, T::from_f64(2.0) / pi),
            ],
        };
        PolyExp { poly, rate_c: pi }
    }

    /// Closed-form tail integral as a symbolic form in the start index x.
    fn tail_sym<T: Scalar>(&self) -> PolyExp<T> {
        let pi = T::from_f64(std::f64::consts::PI) + T::from_f64(1.2246467991473532e-16);
        let pi2 = pi.powi(2);
        let poly = match self.quantity {
            Quantity::Energy => vec![
                LaurentPoly::term(-4, T::from_f64(12.0) / pi2 / pi2),
                LaurentPoly::term(-3, T::from_f64(8.0) / pi.powi(3)),
                LaurentPoly::term(-2, T::from_f64(2.0) / pi2),
            ],
            Quantity::Stress => vec![
                LaurentPoly::term(-4, T::from_f64(4.0) / pi2 / pi2),
                LaurentPoly::term(-3, T::from_f64(4.0) / pi.powi(3)),
                LaurentPoly::term(-2, T::from_f64(2.0) / pi2),
            ],
        };
        PolyExp { poly, rate_c: pi }
    }

    /// Gamma^n_m as an exact `poly(sigma) e^{-pi n sigma}` form.
    pub fn gamma_symbolic<T: Scalar>(&self, n: u32, m: u32) -> ExpLaurent<T> {
        let f = self.summand_sym::<T>();
        let tail = self.tail_sym::<T>();
        let half = T::one() / (T::one() + T::one());
        let mut acc = f.at(n).scale(half).add(&tail.at(n));
        // minus S_m(n) = - sum B_2r/(2r)! f^(2r-1)(n)
        let mut d = f;
        let mut fact = T::one();
        for r in 1..=m {
            d = d.deriv_x();
            fact = fact * T::from_f64((2 * r - 1) as f64) * T::from_f64((2 * r) as f64);
            let b: T = bernoulli_number(2 * r).expect("table").value();
            acc = acc.add(&d.at(n).scale(-(b / fact)));
            d = d.deriv_x();
        }
        acc
    }

    fn jet_at(&self, x: f64, sigma: f64, len: usize) -> Jet<f64> {
        let c = std::f64::consts::PI * sigma;
        let xj = Jet::<f64>::variable(x, len);
        let expo = xj.scale(-c).exp();
        let sym = self.summand_sym::<f64>();
        let mut poly = Jet::constant(0.0, len);
        let mut xp = Jet::constant(1.0, len);
        for pk in &sym.poly {
            poly = poly.add(&xp.scale(pk.eval(sigma)));
            xp = xp.mul(&xj);
        }
        poly.mul(&expo)
    }
}

impl SummandFamily for CuboidFamily {
    fn eval(&self, k: f64, sigma: f64) -> f64 {
        let c = std::f64::consts::PI * sigma;
        match self.quantity {
            Quantity::Energy => {
                (4.0 / (c * c) + 4.0 * k / c + 2.0 * k * k) * (-c * k).exp() / c
            }
            Quantity::Stress => 2.0 * k * k * (-c * k).exp() / c,
        }
    }

    fn derivative(&self, k: f64, sigma: f64, order: usize) -> Result<f64> {
        if order > self.max_derivative_order() {
            return Err(Error::Capability(format!("order {order} above jet capability")));
        }
        Ok(self.jet_at(k, sigma, order + 1).derivative(order))
    }

    fn max_derivative_order(&self) -> usize {
        17
    }

    fn n_min(&self) -> u32 {
        match self.sector {
            Sector::Te => 1,
            Sector::Tm => 0,
        }
    }

    fn integral_tail(&self, n: f64, sigma: f64, _rel_tol: f64) -> Result<QuadratureResult> {
        let c = std::f64::consts::PI * sigma;
        let value = match self.quantity {
            Quantity::Energy => {
                (12.0 / (c * c) + 8.0 * n / c + 2.0 * n * n) * (-c * n).exp() / (c * c)
            }
            Quantity::Stress => {
                (4.0 / (c * c) + 4.0 * n / c + 2.0 * n * n) * (-c * n).exp() / (c * c)
            }
        };
        Ok(QuadratureResult { value, error_estimate: 1e-16 * value.abs(), evaluations: 1 })
    }

    fn has_analytic_tail(&self) -> bool {
        true
    }

    fn abs_derivative_tail(&self, n: f64, sigma: f64, order: usize, rel_tol: f64) -> Result<f64> {
        crate::euler_maclaurin::abs_derivative_tail_generic(self, n, sigma, order, rel_tol)
    }

    fn gamma_dd(&self, n: u32, n0: u32, m: u32, sigma: Dd) -> Option<Dd> {
        let mut acc = Dd::ZERO;
        for k in n..n0 {
            let sym = self.summand_sym::<Dd>();
            acc = acc + sym.at(k).eval(sigma);
        }
        Some(acc + self.gamma_symbolic::<Dd>(n0, m).eval(sigma))
    }

    fn analytic_beta(&self, n: u32, n0: u32, m: u32) -> Option<f64> {
        // the prefix sum_{k<n0} f(k) is O(sigma^{-3}) with e^{-pi k sigma}
        // factors; its sigma^0 coefficient contributes too
        let mut beta = Dd::ZERO;
        for k in n..n0 {
            beta = beta + self.summand_sym::<Dd>().at(k).series_coefficient(0);
        }
        beta = beta + self.gamma_symbolic::<Dd>(n0, m).series_coefficient(0);
        Some(beta.to_f64())
    }

    fn analytic_singular(&self, n: u32, n0: u32, m: u32) -> Option<Vec<(u32, f64, f64)>> {
        let mut acc: Vec<(u32, f64, f64)> = Vec::new();
        for power in -4..0 {
            let mut c = Dd::ZERO;
            for k in n..n0 {
                c = c + self.summand_sym::<Dd>().at(k).series_coefficient(power);
            }
            c = c + self.gamma_symbolic::<Dd>(n0, m).series_coefficient(power);
            if c.to_f64().abs() > 1e-14 {
                acc.push((0, power as f64, c.to_f64()));
            }
        }
        Some(acc)
    }
}

/// Homogeneous energy family with the quadratic regulator e^{-sigma Omega^2}
/// (b = pi^2 sigma):
///
///   F(x) = int_{x^2}^inf sqrt(u) e^{-b u} du,   F'(x) = -2 x^2 e^{-b x^2}
///   int_n^inf F = int_{n^2}^inf (u - n sqrt(u)) e^{-b u} du
#[derive(Clone, Copy, Debug)]
pub struct CuboidQuadraticRegulator {
    pub sector: Sector,
}

impl CuboidQuadraticRegulator {
    fn b(sigma: f64) -> f64 {
        std::f64::consts::PI * std::f64::consts::PI * sigma
    }

    /// Jet of G(x) = -2 x^2 e^{-b x^2}; F^(k) = G^(k-1).
    fn g_jet<T: Scalar>(x: T, b: T, len: usize) -> Jet<T> {
        let xj = Jet::variable(x, len);
        let x2 = xj.mul(&xj);
        x2.scale(-(T::one() + T::one())).mul(&x2.scale(-b).exp())
    }

    fn b_dd(sigma: Dd) -> Dd {
        let pi = Dd::PI;
        pi * pi * sigma
    }

    /// Geometric breakpoints from `lo` covering decay scale 1/b.
    fn blocks(lo: f64, b: f64) -> Vec<f64> {
        let mut pts = vec![lo];
        let mut step = (0.25 / b).max(1e-3);
        let target = lo + 90.0 / b;
        let mut x = lo;
        while x < target {
            x += step;
            step *= 2.0;
            pts.push(x.min(target));
        }
        pts
    }
}

impl SummandFamily for CuboidQuadraticRegulator {
    fn eval(&self, k: f64, sigma: f64) -> f64 {
        let b = Self::b(sigma);
        let f = move |u: f64| u.sqrt() * (-b * u).exp();
        calculus::integrate(&f, k * k, f64::INFINITY, 1e-12)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    }

    fn derivative(&self, k: f64, sigma: f64, order: usize) -> Result<f64> {
        if order == 0 {
            return Ok(self.eval(k, sigma));
        }
        if order > self.max_derivative_order() {
            return Err(Error::Capability(format!("order {order} above jet capability")));
        }
        let jet = Self::g_jet(k, Self::b(sigma), order);
        Ok(jet.derivative(order - 1))
    }

    fn max_derivative_order(&self) -> usize {
        17
    }

    fn n_min(&self) -> u32 {
        match self.sector {
            Sector::Te => 1,
            Sector::Tm => 0,
        }
    }

    fn integral_tail(&self, n: f64, sigma: f64, rel_tol: f64) -> Result<QuadratureResult> {
        let b = Self::b(sigma);
        let f = move |u: f64| (u - n * u.sqrt()) * (-b * u).exp();
        calculus::integrate(&f, n * n, f64::INFINITY, rel_tol)
    }

    fn abs_derivative_tail(&self, n: f64, sigma: f64, order: usize, rel_tol: f64) -> Result<f64> {
        crate::euler_maclaurin::abs_derivative_tail_generic(self, n, sigma, order, rel_tol)
    }

    fn gamma_dd(&self, n: u32, n0: u32, m: u32, sigma: Dd) -> Option<Dd> {
        let b = Self::b_dd(sigma);
        let bf = b.to_f64();
        let half = Dd::from_f64(0.5);
        let f_at = |k: u32| -> Dd {
            if k == 0 {
                // int_0^inf sqrt(u) e^{-bu} du = sqrt(pi)/(2 b^{3/2})
                let sb = b.sqrt();
                return Dd::PI.sqrt() / (Dd::from_f64(2.0) * sb * b);
            }
            let k2 = (k * k) as f64;
            calculus::integrate_dd(
                &|u: Dd| u.sqrt() * (-b * u).exp(),
                &Self::blocks(k2, bf),
            )
        };
        let mut acc = Dd::ZERO;
        for k in n..n0 {
            acc = acc + f_at(k);
        }
        acc = acc + half * f_at(n0);
        // S_m via dd jets on G
        let mut fact = Dd::ONE;
        let glen = (2 * m) as usize;
        let jet = Self::g_jet(Dd::from_f64(n0 as f64), b, glen.max(2));
        for r in 1..=m {
            fact = fact * Dd::from_f64((2 * r - 1) as f64) * Dd::from_f64((2 * r) as f64);
            let bern: Dd = bernoulli_number(2 * r).expect("table").value();
            acc = acc - bern / fact * jet.derivative((2 * r - 2) as usize);
        }
        // tail integral
        let nf = Dd::from_f64(n0 as f64);
        let tail = if n0 == 0 {
            Dd::ONE / (b * b)
        } else {
            calculus::integrate_dd(
                &|u: Dd| (u - nf * u.sqrt()) * (-b * u).exp(),
                &Self::blocks((n0 * n0) as f64, bf),
            )
        };
        Some(acc + tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler_maclaurin::{gamma, s_correction};

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn closed_forms_match_quadrature() {
        // F(nz) = int_{nz^2}^inf sqrt(u) e^{-sigma pi sqrt u} du
        let fam = CuboidFamily::new(Sector::Te, Quantity::Energy);
        let sigma = 0.1;
        for nz in [1.0, 3.0] {
            let f = move |u: f64| u.sqrt() * (-sigma * PI * u.sqrt()).exp();
            let q = calculus::integrate(&f, nz * nz, f64::INFINITY, 1e-12).unwrap();
            let v = fam.eval(nz, sigma);
            assert!((v - q.value).abs() < 1e-10 * v.abs(), "nz={nz}: {v} vs {}", q.value);
        }
        // TM at 0: 4/(pi^3 sigma^3)
        let tm = CuboidFamily::new(Sector::Tm, Quantity::Energy);
        let f0 = 4.0 / (PI * sigma).powi(3);
        assert!((tm.eval(0.0, sigma) - f0).abs() < 1e-12 * f0);

        // stress: Fbar(nz) = 2 nz^2 e^{-sigma pi nz} / (pi sigma), checked
        // against quadrature of int_{nz^2}^inf nz^2 u^{-1/2} e^{-sigma pi sqrt u} du
        let st = CuboidFamily::new(Sector::Te, Quantity::Stress);
        let sigma2 = 0.2;
        let nz = 2.0;
        let fq = move |u: f64| nz * nz / u.sqrt() * (-sigma2 * PI * u.sqrt()).exp();
        let q = calculus::integrate(&fq, nz * nz, f64::INFINITY, 1e-12).unwrap();
        assert!((st.eval(nz, sigma2) - q.value).abs() < 1e-10 * q.value);
        // TM stress at 0 vanishes
        let stm = CuboidFamily::new(Sector::Tm, Quantity::Stress);
        assert_eq!(stm.eval(0.0, sigma2), 0.0);
        // TE stress at 1: 2 e^{-sigma pi} / (pi sigma)
        assert!(
            (st.eval(1.0, sigma2) - 2.0 * (-sigma2 * PI).exp() / (PI * sigma2)).abs() < 1e-14
        );
    }

    #[test]
    fn s_correction_values() {
        // S_2(0)[F_TM] = 1/180
        let tm = CuboidFamily::new(Sector::Tm, Quantity::Energy);
        let s = s_correction(&tm, 0.0, 2, 0.05).unwrap();
        assert!((s - 1.0 / 180.0).abs() < 1e-13, "{s}");
        // S_2(1)[F_TE] = (-29/180 - sigma pi/90 + sigma^2 pi^2/360) e^{-sigma pi}
        let te = CuboidFamily::new(Sector::Te, Quantity::Energy);
        let sigma = 0.01;
        let expect = (-29.0 / 180.0 - sigma * PI / 90.0 + sigma * sigma * PI * PI / 360.0)
            * (-sigma * PI).exp();
        let s1 = s_correction(&te, 1.0, 2, sigma).unwrap();
        assert!((s1 - expect).abs() < 1e-13 * expect.abs(), "{s1} vs {expect}");
        // stress: S_2(0)[Fbar_TM] = 1/60
        let stm = CuboidFamily::new(Sector::Tm, Quantity::Stress);
        let s2 = s_correction(&stm, 0.0, 2, 0.05).unwrap();
        assert!((s2 - 1.0 / 60.0).abs() < 1e-13, "{s2}");
    }

    #[test]
    fn gamma_closed_forms() {
        // Gamma^0_2[F_TM] = 12/(pi^4 s^4) + 2/(pi^3 s^3) - 1/180 exactly
        let tm = CuboidFamily::new(Sector::Tm, Quantity::Energy);
        let sigma = 0.05;
        let g = gamma(&tm, 0, 2, sigma, 1e-12).unwrap();
        let expect = 12.0 / (PI * sigma).powi(4) + 2.0 / (PI * sigma).powi(3) - 1.0 / 180.0;
        assert!((g - expect).abs() < 1e-12 * expect.abs(), "{g} vs {expect}");
        // Gamma^0_2[Fbar_TM] = 4/(pi^4 s^4) - 1/60
        let stm = CuboidFamily::new(Sector::Tm, Quantity::Stress);
        let gs = gamma(&stm, 0, 2, sigma, 1e-12).unwrap();
        let expect_s = 4.0 / (PI * sigma).powi(4) - 1.0 / 60.0;
        assert!((gs - expect_s).abs() < 1e-10, "{gs} vs {expect_s}");
        // TE energy at  n=1: series constant is -1/180 via the symbolic path
        let te = CuboidFamily::new(Sector::Te, Quantity::Energy);
        assert!((te.analytic_beta(1, 1, 2).unwrap() + 1.0 / 180.0).abs() < 1e-13);
        // and the sigma^{-4}, sigma^{-3} singular parts match the series
        let sing = te.analytic_singular(1, 1, 2).unwrap();
        let c4 = sing.iter().find(|t| t.1 == -4.0).unwrap().2;
        let c3 = sing.iter().find(|t| t.1 == -3.0).unwrap().2;
        assert!((c4 - 12.0 / PI.powi(4)).abs() < 1e-12);
        assert!((c3 + 2.0 / PI.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn gamma_series_vs_dd_eval() {
        // the dd evaluation of Gamma agrees with the direct f64 route
        let te = CuboidFamily::new(Sector::Te, Quantity::Energy);
        let sigma = 0.05;
        let d = te.gamma_dd(1, 1, 2, Dd::from_f64(sigma)).unwrap().to_f64();
        let f = gamma(&te, 1, 2, sigma, 1e-12).unwrap();
        assert!((d - f).abs() < 1e-9 * f.abs(), "{d} vs {f}");
    }

    #[test]
    fn shift_invariance_of_beta() {
        // moving terms between prefix and integral leaves the series constant
        let te = CuboidFamily::new(Sector::Te, Quantity::Energy);
        for n0 in 1..=4 {
            let b = te.analytic_beta(1, n0, 2).unwrap();
            assert!((b + 1.0 / 180.0).abs() < 1e-12, "n0={n0}: {b}");
        }
        // and is independent of m for m >= 2
        for m in 2..=4 {
            let b = te.analytic_beta(1, 1, m).unwrap();
            assert!((b + 1.0 / 180.0).abs() < 1e-12, "m={m}: {b}");
        }
    }

    #[test]
    fn quadratic_regulator_gamma() {
        // TM, n = 0: Gamma^0_2 = sqrt(pi)/(4 b^{3/2}) + 1/b^2 - 1/180, b = pi^2 sigma
        let fam = CuboidQuadraticRegulator { sector: Sector::Tm };
        let sigma = 0.02;
        let b = PI * PI * sigma;
        let g = gamma(&fam, 0, 2, sigma, 1e-11).unwrap();
        let expect = PI.sqrt() / (4.0 * b.powf(1.5)) + 1.0 / (b * b) - 1.0 / 180.0;
        assert!((g - expect).abs() < 1e-8 * expect.abs(), "{g} vs {expect}");
        let gd = fam.gamma_dd(0, 0, 2, Dd::from_f64(sigma)).unwrap().to_f64();
        assert!((gd - expect).abs() < 1e-12 * expect.abs(), "{gd} vs {expect}");
    }
}
