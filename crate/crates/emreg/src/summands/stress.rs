//! Integrated normal-stress summands for the open guide.
//!
//! At a cross-section Z0 = z0/a the per-mode contribution is a bracket of
//! the mode function and its Z-derivatives divided by the mode norm:
//!
//!   TE: [ (Y')^2 - Y Y'' ] / (4 Omega I)
//!   TM: [ (Y')^2 - (Y/cosh) (cosh Y)'' + Y^2 (3 cosh^2 - 1)/cosh^2 ] / (4 Omega I)
//!
//! and the transverse continuum reduces the mode sum to
//!   f(l, sigma) = (1/4 pi) int_0^inf q(l, theta(u)) e^{-sigma Omega(l,u)} du
//! with theta = u (TE) or u + 1 (TM). No closed form is known for the
//! u-integral, so the regularization of the l-sum runs on interpolation
//! through the integer samples: the summand values are exact (to quadrature
//! tolerance) at integers and the Euler-Maclaurin machinery differentiates
//! and integrates the local polynomial interpolant.

use crate::calculus::{self, QuadratureResult};
use crate::error::{Error, Result};
use crate::euler_maclaurin::SummandFamily;
use crate::jets::Jet;
use crate::spectra::{mode_function, mode_norm_integral, omega_enz, GuideGeometry, Sector};

/// Mode-shape bracket of the integrated normal stress at Z0, per unit
/// normalization (the 1/(4 Omega I) factor included).
pub fn stress_mode_weight(sector: Sector, ell: u32, theta: f64, z0_over_a: f64) -> f64 {
    let m = mode_function(ell, theta);
    let norm = mode_norm_integral(&m);
    let omega = omega_enz(ell as f64, theta);
    let z = z0_over_a;
    let y = m.eval(z);
    let dy = m.deriv1(z);
    let bracket = match sector {
        Sector::Te => dy * dy - y * m.deriv2(z),
        Sector::Tm => {
            let cosh = z.cosh();
            let cy = m.series.clone();
            // cosh * Y shifts every exponent down by one
            let mut shifted = crate::spectra::CoshSeries {
                s: cy.s,
                ..Default::default()
            };
            for (&j, &c) in &cy.cosh_terms {
                *shifted.cosh_terms.entry(j - 1).or_insert(0.0) += c;
            }
            for (&j, &c) in &cy.sinh_terms {
                *shifted.sinh_terms.entry(j - 1).or_insert(0.0) += c;
            }
            let d2 = shifted.deriv().deriv().eval(z);
            dy * dy - y / cosh * d2 + y * y / (cosh * cosh) * (3.0 * cosh * cosh - 1.0)
        }
    };
    bracket / (4.0 * omega * norm)
}

/// Continuum stress integrand f-bar at transverse wavenumber rho (in units
/// of 1/a); gauge-trivial at rho = 0.
pub fn stress_integrand(
    sector: Sector,
    ell: u32,
    z0: f64,
    rho: f64,
    geom: &GuideGeometry,
) -> Result<f64> {
    geom.validate()?;
    if rho <= 0.0 {
        return Err(Error::ExcludedMode("rho = 0 is the gauge-trivial transverse limit".into()));
    }
    let u = (geom.a * rho).powi(2);
    let theta = match sector {
        Sector::Te => u,
        Sector::Tm => u + 1.0,
    };
    Ok(stress_mode_weight(sector, ell, theta, z0 / geom.a))
}

/// One regulated stress summand value
///   f(l, sigma) = (1/4 pi) int_0^inf q(l, theta(u)) e^{-sigma Omega} du
/// by adaptive quadrature (independent of the tabulated family below).
pub fn f_stress_enz(sector: Sector, sigma: f64, ell: u32, z0: f64, geom: &GuideGeometry) -> Result<f64> {
    geom.validate()?;
    if !(sigma > 0.0) {
        return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
    }
    let z0a = z0 / geom.a;
    // t = sqrt(u): the mode functions are analytic in sqrt(theta), which is
    // t (TE) or sqrt(t^2+1) (TM), so the transformed integrand is smooth
    let f = move |t: f64| {
        if t <= 0.0 {
            return 0.0;
        }
        let theta = match sector {
            Sector::Te => t * t,
            Sector::Tm => t * t + 1.0,
        };
        let q = stress_mode_weight(sector, ell, theta, z0a);
        2.0 * t * q * (-sigma * omega_enz(ell as f64, theta)).exp()
    };
    let r = calculus::integrate(&f, 0.0, f64::INFINITY, 1e-9)?;
    Ok(r.value / (4.0 * std::f64::consts::PI))
}

/// Tabulated stress summand family: integer-l values precomputed on shared
/// quadrature nodes for every sigma in the grid, with local polynomial
/// interpolation supplying the real-l evaluations and derivatives the
/// Euler-Maclaurin operators need.
pub struct StressFamily {
    pub sector: Sector,
    pub z0_over_a: f64,
    sigma_grid: Vec<f64>,
    /// tables[i][l] = f(l, sigma_grid[i])
    tables: Vec<Vec<f64>>,
    ell_max: usize,
}

const WINDOW: usize = 8;

impl StressFamily {
    /// Precompute the summand tables. `refine` doubles the quadrature panel
    /// count (used by the stability-under-tolerance-halving check).
    pub fn build(
        sector: Sector,
        z0_over_a: f64,
        sigma_grid: Vec<f64>,
        refine: usize,
    ) -> Result<StressFamily> {
        if sigma_grid.is_empty() || sigma_grid[0] <= 0.0 {
            return Err(Error::InvalidConfig("stress family needs a positive sigma grid".into()));
        }
        let sigma_min = sigma_grid[0];
        // truncation scales: e^{-sigma Omega} below ~1e-15 contributes nothing
        let omega_cut = 35.0 / sigma_min;
        let ell_max = (omega_cut.ceil() as usize).max(WINDOW + 2);
        let t_max = omega_cut;

        // composite Gauss-Legendre panels in t = sqrt(u), where the mode
        // shapes are analytic; du = 2t dt
        let mut pts = vec![0.0, 0.5, 1.0, 2.0, 4.0];
        let mut x = 4.0;
        while x < t_max {
            x *= 2.0;
            pts.push(x.min(t_max));
        }
        let order = 24 * (1 << refine.min(3));
        let (nodes, weights) = gauss_legendre_f64(order);

        let mut tables = vec![vec![0.0; ell_max + 1]; sigma_grid.len()];
        for ell in 0..=ell_max {
            // q-profile on the shared nodes, then one exponential dot product
            // per sigma
            let mut qs: Vec<(f64, f64, f64)> = Vec::new(); // (weight, q, omega)
            for w in pts.windows(2) {
                let half = 0.5 * (w[1] - w[0]);
                let mid = 0.5 * (w[1] + w[0]);
                for (&xn, &wn) in nodes.iter().zip(&weights) {
                    let t = mid + half * xn;
                    if t <= 0.0 {
                        continue;
                    }
                    let theta = match sector {
                        Sector::Te => t * t,
                        Sector::Tm => t * t + 1.0,
                    };
                    let q = stress_mode_weight(sector, ell as u32, theta, z0_over_a);
                    qs.push((wn * half * 2.0 * t, q, omega_enz(ell as f64, theta)));
                }
            }
            for (i, &sigma) in sigma_grid.iter().enumerate() {
                let mut acc = 0.0;
                for &(w, q, omega) in &qs {
                    acc += w * q * (-sigma * omega).exp();
                }
                tables[i][ell] = acc / (4.0 * std::f64::consts::PI);
            }
        }
        Ok(StressFamily { sector, z0_over_a, sigma_grid, tables, ell_max })
    }

    pub fn sigma_grid(&self) -> &[f64] {
        &self.sigma_grid
    }

    fn table(&self, sigma: f64) -> Result<&[f64]> {
        self.sigma_grid
            .iter()
            .position(|&s| (s - sigma).abs() <= 1e-12 * s.abs())
            .map(|i| self.tables[i].as_slice())
            .ok_or_else(|| Error::InvalidConfig(format!("sigma {sigma} not in the stress grid")))
    }

    /// Newton-form interpolant through the integer window around x,
    /// evaluated as a jet for derivatives.
    fn interp_jet(table: &[f64], x: f64, len: usize) -> Jet<f64> {
        let lo = (x.floor() as isize - (WINDOW as isize / 2 - 1))
            .clamp(0, table.len() as isize - WINDOW as isize) as usize;
        let xs: Vec<f64> = (lo..lo + WINDOW).map(|i| i as f64).collect();
        // divided differences
        let mut dd: Vec<f64> = table[lo..lo + WINDOW].to_vec();
        for level in 1..WINDOW {
            for i in (level..WINDOW).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - level]);
            }
        }
        // Newton evaluation with a jet argument
        let xj = Jet::<f64>::variable(x, len);
        let mut acc = Jet::constant(dd[WINDOW - 1], len);
        for i in (0..WINDOW - 1).rev() {
            acc = acc.mul(&xj.shift(-xs[i]));
            acc = acc.add(&Jet::constant(dd[i], len));
        }
        acc
    }
}

impl SummandFamily for StressFamily {
    fn eval(&self, k: f64, sigma: f64) -> f64 {
        let table = match self.table(sigma) {
            Ok(t) => t,
            Err(_) => return f64::NAN,
        };
        if k >= self.ell_max as f64 {
            return 0.0;
        }
        Self::interp_jet(table, k, 1).c[0]
    }

    fn derivative(&self, k: f64, sigma: f64, order: usize) -> Result<f64> {
        if order > self.max_derivative_order() {
            return Err(Error::Capability(format!(
                "stress interpolant supports derivative order <= {}, got {order}",
                self.max_derivative_order()
            )));
        }
        let table = self.table(sigma)?;
        if k >= self.ell_max as f64 {
            return Ok(0.0);
        }
        Ok(Self::interp_jet(table, k, order + 1).derivative(order))
    }

    fn max_derivative_order(&self) -> usize {
        3
    }

    fn integral_tail(&self, n: f64, sigma: f64, _rel_tol: f64) -> Result<QuadratureResult> {
        let table = self.table(sigma)?;
        // Gauss-Legendre 8 on each unit interval of the interpolant; the
        // table is truncated where e^{-sigma Omega} < 1e-15
        let (nodes, weights) = gauss_legendre_f64(8);
        let mut acc = 0.0;
        let mut evals = 0;
        let mut lo = n;
        while lo < self.ell_max as f64 {
            let hi = (lo.floor() + 1.0).min(self.ell_max as f64);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&xn, &wn) in nodes.iter().zip(&weights) {
                acc += wn * half * Self::interp_jet(table, mid + half * xn, 1).c[0];
                evals += 1;
            }
            lo = hi;
        }
        // truncation floor: the last retained summand value bounds the tail
        let floor = table[self.ell_max].abs() + 1e-300;
        Ok(QuadratureResult { value: acc, error_estimate: 1e-12 * acc.abs() + floor, evaluations: evals })
    }

    fn abs_derivative_tail(&self, n: f64, sigma: f64, order: usize, _rel_tol: f64) -> Result<f64> {
        let table = self.table(sigma)?;
        if order > 3 {
            return Err(Error::Capability("stress interpolant derivative order <= 3".into()));
        }
        let (nodes, weights) = gauss_legendre_f64(8);
        let mut acc = 0.0;
        let mut lo = n;
        while lo < self.ell_max as f64 {
            let hi = (lo.floor() + 1.0).min(self.ell_max as f64);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (&xn, &wn) in nodes.iter().zip(&weights) {
                acc += wn
                    * half
                    * Self::interp_jet(table, mid + half * xn, order + 1).derivative(order).abs();
            }
            lo = hi;
        }
        Ok(acc * 1.02)
    }
}

/// Plain f64 Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre_f64(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre_f64(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_f64(n, x);
        nodes[i - 1] = x;
        weights[i - 1] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_f64(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn te_bracket_lowest_mode() {
        // l = 0, theta = 1: Y = sech Z, bracket at Z=0 is (0)^2 - (1)(-1) = 1,
        // so the weight is 1/(4 Omega I) with I = 4/3, Omega = sqrt 2
        let w = stress_mode_weight(Sector::Te, 0, 1.0, 0.0);
        let expect = 1.0 / (4.0 * 2.0f64.sqrt() * (4.0 / 3.0));
        assert!((w - expect).abs() < 1e-12 * expect, "{w} vs {expect}");
    }

    #[test]
    fn odd_mode_finite_at_center() {
        // l = 1: Y(0) = 0, Y'(0) != 0, bracket = (Y')^2 > 0
        let geom = GuideGeometry::square(100.0);
        let v = stress_integrand(Sector::Te, 1, 0.0, 0.7, &geom).unwrap();
        assert!(v > 0.0);
        // and it decays as |z0| grows
        let far = stress_integrand(Sector::Te, 1, 30.0, 0.7, &geom).unwrap();
        assert!(far.abs() < 1e-8 * v.abs());
        // gauge-trivial transverse limit
        assert!(stress_integrand(Sector::Te, 1, 0.0, 0.0, &geom).is_err());
    }

    #[test]
    fn summand_decays_in_sigma() {
        let geom = GuideGeometry::square(100.0);
        let v1 = f_stress_enz(Sector::Te, 0.5, 0, 0.0, &geom).unwrap();
        let v2 = f_stress_enz(Sector::Te, 1.0, 0, 0.0, &geom).unwrap();
        let v3 = f_stress_enz(Sector::Te, 2.0, 0, 0.0, &geom).unwrap();
        assert!(v1 > v2 && v2 > v3, "{v1} {v2} {v3}");
        assert!(v3 > 0.0);
    }

    #[test]
    fn z0_parity() {
        let geom = GuideGeometry::square(100.0);
        for sector in [Sector::Te, Sector::Tm] {
            for ell in [0u32, 1] {
                let plus = f_stress_enz(sector, 0.5, ell, 0.7, &geom).unwrap();
                let minus = f_stress_enz(sector, 0.5, ell, -0.7, &geom).unwrap();
                assert!(
                    (plus - minus).abs() <= 1e-9 * plus.abs().max(1e-30),
                    "{sector} l={ell}: {plus} vs {minus}"
                );
            }
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        let grid = vec![0.6, 0.8, 1.0];
        let fam = StressFamily::build(Sector::Te, 0.0, grid, 0).unwrap();
        let geom = GuideGeometry::square(100.0);
        for ell in [0u32, 2, 5] {
            let direct = f_stress_enz(Sector::Te, 0.8, ell, 0.0, &geom).unwrap();
            let tab = fam.eval(ell as f64, 0.8);
            assert!(
                ((tab - direct) / direct).abs() < 1e-6,
                "l={ell}: table {tab} vs direct {direct}"
            );
        }
    }

    #[test]
    fn interpolant_derivative_consistency() {
        // derivative of the interpolant approximates the sigma-regulated
        // decay rate: compare against a coarse finite difference of the table
        let grid = vec![0.8];
        let fam = StressFamily::build(Sector::Tm, 0.5, grid, 0).unwrap();
        let d = fam.derivative(3.0, 0.8, 1).unwrap();
        let fd = (fam.eval(3.5, 0.8) - fam.eval(2.5, 0.8)) / 1.0;
        assert!((d - fd).abs() < 0.3 * d.abs().max(fd.abs()), "{d} vs {fd}");
    }
}
