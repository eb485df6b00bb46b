//! Mode counting and density-of-states asymptotics for the open guide in
//! the large-cross-section limit, plus the consistency check of the leading
//! singular parts against the density-of-states energy growth.

use crate::calculus;
use crate::error::{Error, Result};
use crate::spectra::Sector;

/// Exact enumeration of modes with Omega_{l,nx,ny} <= omega for a square
/// cross-section of side `l_side`, respecting the gauge exclusions.
pub fn count_modes_brute(sector: Sector, omega: f64, l_side: f64, a: f64) -> Result<u64> {
    if omega < 0.0 || l_side <= 0.0 || a <= 0.0 {
        return Err(Error::Domain("omega >= 0 and positive lengths required".into()));
    }
    if omega == 0.0 {
        return Ok(0);
    }
    // sqrt(theta) <= u0 = (sqrt(4 omega^2 + 1) - 1)/2 bounds the search box
    let u0 = 0.5 * ((4.0 * omega * omega + 1.0).sqrt() - 1.0);
    let scale = std::f64::consts::PI * a / l_side; // sqrt(theta_TE) = scale * |n|
    let n_max = (u0 / scale).ceil() as u64 + 1;
    if n_max * n_max > 4_000_000_000 {
        return Err(Error::Budget(format!("search box {n_max}^2 too large")));
    }
    let mut count = 0u64;
    for nx in 0..=n_max {
        for ny in 0..=n_max {
            if nx == 0 && ny == 0 {
                continue;
            }
            if sector == Sector::Tm && (nx == 0 || ny == 0) {
                continue;
            }
            let chi2 = scale * scale * ((nx * nx + ny * ny) as f64);
            let theta = match sector {
                Sector::Te => chi2,
                Sector::Tm => chi2 + 1.0,
            };
            let s = theta.sqrt();
            // (l + s)(l + s + 1) <= omega^2  =>  l <= ell_top
            let ell_top = 0.5 * ((4.0 * omega * omega + 1.0).sqrt() - 1.0) - s;
            if ell_top >= 0.0 {
                count += ell_top.floor() as u64 + 1;
            }
        }
    }
    Ok(count)
}

/// Closed-form continuum volume of the iso-spectral domain:
///   V_TE = L^2/(96 pi a^2) (xi - 1)^3
///   V_TM = L^2/(24 pi a^2) (3 xi W^2 - 9 W^2 + 4 - (2 W^2 - xi + 1) sqrt(4 W^2 - 2 xi + 2))
/// with xi = sqrt(4 W^2 + 1); the TM domain is empty below W = sqrt(2).
pub fn dos_volume_analytic(sector: Sector, omega: f64, l_side: f64, a: f64) -> f64 {
    let pref = l_side * l_side / (a * a);
    let pi = std::f64::consts::PI;
    let w2 = omega * omega;
    let xi = (4.0 * w2 + 1.0).sqrt();
    match sector {
        Sector::Te => pref / (96.0 * pi) * (xi - 1.0).powi(3),
        Sector::Tm => {
            if omega * omega < 2.0 {
                return 0.0;
            }
            pref / (24.0 * pi)
                * (3.0 * xi * w2 - 9.0 * w2 + 4.0
                    - (2.0 * w2 - xi + 1.0) * (4.0 * w2 - 2.0 * xi + 2.0).sqrt())
        }
    }
}

/// d/dOmega of the per-(L^2/a^2) volume, analytic chain rule.
fn dos_density(sector: Sector, omega: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let w = omega;
    let w2 = w * w;
    let xi = (4.0 * w2 + 1.0).sqrt();
    let dxi = 4.0 * w / xi;
    match sector {
        Sector::Te => 3.0 * (xi - 1.0).powi(2) * dxi / (96.0 * pi),
        Sector::Tm => {
            if w2 < 2.0 {
                return 0.0;
            }
            let root = (4.0 * w2 - 2.0 * xi + 2.0).sqrt();
            let droot = (8.0 * w - 2.0 * dxi) / (2.0 * root.max(1e-300));
            (3.0 * dxi * w2 + 6.0 * xi * w - 18.0 * w
                - (4.0 * w - dxi) * root
                - (2.0 * w2 - xi + 1.0) * droot)
                / (24.0 * pi)
        }
    }
}

/// Both estimates of the leading large-system energy growth, in units
/// hbar c L^2 / (pi sqrt(kappa0) a^3):
/// (i) the density-of-states integral (pi/2) int Omega e^{-sigma Omega}
///     (dN_TE + dN_TM)/dOmega dOmega, and
/// (ii) the leading singular coefficient of the two regulated sums,
///      (c4_TE + c4_TM)/8 / sigma^4 = 3/(2 sigma^4).
pub fn energy_growth_leading(sigma: f64) -> Result<(f64, f64)> {
    if !(sigma > 0.0) {
        return Err(Error::Domain("sigma must be positive".into()));
    }
    let f = move |w: f64| {
        w * (-sigma * w).exp() * (dos_density(Sector::Te, w) + dos_density(Sector::Tm, w))
    };
    let r = calculus::integrate(&f, 0.0, f64::INFINITY, 1e-9)?;
    let dos_path = std::f64::consts::PI / 2.0 * r.value;
    let singular_path = 12.0 / 8.0 / sigma.powi(4);
    Ok((dos_path, singular_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn volumes_at_reference_points() {
        assert_eq!(dos_volume_analytic(Sector::Te, 0.0, 100.0, 1.0), 0.0);
        assert_eq!(dos_volume_analytic(Sector::Tm, 0.0, 100.0, 1.0), 0.0);
        // TE at Omega = 2: (sqrt 17 - 1)^3 L^2/(96 pi a^2)
        let v = dos_volume_analytic(Sector::Te, 2.0, 1.0, 1.0);
        let expect = (17.0f64.sqrt() - 1.0).powi(3) / (96.0 * PI);
        assert!((v - expect).abs() < 1e-14);
        // TM volume vanishes exactly at its spectral floor Omega = sqrt 2
        let v2 = dos_volume_analytic(Sector::Tm, 2.0f64.sqrt(), 1.0, 1.0);
        assert!(v2.abs() < 1e-12, "{v2}");
    }

    #[test]
    fn asymptotic_expansion() {
        // V / (L^2/a^2) -> Omega^3/(12 pi) - Omega^2/(8 pi) + O(Omega)
        for sector in [Sector::Te, Sector::Tm] {
            for &omega in &[50.0, 100.0] {
                let v = dos_volume_analytic(sector, omega, 1.0, 1.0);
                let lead = omega.powi(3) / (12.0 * PI) - omega * omega / (8.0 * PI);
                assert!(
                    (v - lead).abs() < 0.2 * omega,
                    "{sector} Omega={omega}: {v} vs {lead}, diff {}",
                    v - lead
                );
            }
        }
        // TE and TM volumes differ only at O(Omega)
        let omega = 80.0;
        let d = dos_volume_analytic(Sector::Te, omega, 1.0, 1.0)
            - dos_volume_analytic(Sector::Tm, omega, 1.0, 1.0);
        assert!(d.abs() < 0.5 * omega, "difference {d}");
    }

    #[test]
    fn iso_spectral_roots() {
        // l(u) = (xi-1)/2 - F(u) vanishes at the cited positive roots
        let omega: f64 = 3.7;
        let xi = (4.0 * omega * omega + 1.0).sqrt();
        let u0_te = 0.5 * (xi - 1.0);
        let l_te = 0.5 * (xi - 1.0) - u0_te;
        assert!(l_te.abs() < 1e-14);
        let u0_tm = 0.5 * (4.0 * omega * omega - 2.0 * xi - 2.0).sqrt();
        let l_tm = 0.5 * (xi - 1.0) - (u0_tm * u0_tm + 1.0).sqrt();
        assert!(l_tm.abs() < 1e-12, "{l_tm}");
    }

    #[test]
    fn brute_count_small_values() {
        assert_eq!(count_modes_brute(Sector::Te, 0.0, 100.0, 1.0).unwrap(), 0);
        // TM floor: Omega^2 >= sqrt(theta)(sqrt(theta)+1) > 2 for theta > 1
        assert_eq!(count_modes_brute(Sector::Tm, 1.4, 100.0, 1.0).unwrap(), 0);
    }

    #[test]
    fn brute_count_approaches_volume() {
        // The exact count exceeds the continuum volume by the half-cell of
        // the l = 0 base plane, a relative surface term of 3/(2 Omega) that
        // does not shrink with L (the l lattice spacing is 1 regardless of
        // the cross-section). The ratio converges to 1 as Omega grows.
        for &(omega, l_side) in &[(5.0, 100.0), (10.0, 100.0), (10.0, 200.0)] {
            let c = count_modes_brute(Sector::Te, omega, l_side, 1.0).unwrap() as f64;
            let v = dos_volume_analytic(Sector::Te, omega, l_side, 1.0);
            let predicted = 1.0 + 1.5 / omega;
            assert!(
                (c / v - predicted).abs() < 0.35 / omega,
                "Omega={omega} L={l_side}: ratio {} vs surface law {predicted}",
                c / v
            );
        }
        let c = count_modes_brute(Sector::Te, 40.0, 100.0, 1.0).unwrap() as f64;
        let v = dos_volume_analytic(Sector::Te, 40.0, 100.0, 1.0);
        assert!((c / v - 1.0).abs() < 0.05, "count {c} vs volume {v}");
        // monotone in Omega
        let c2 = count_modes_brute(Sector::Te, 6.0, 100.0, 1.0).unwrap();
        let c1 = count_modes_brute(Sector::Te, 5.0, 100.0, 1.0).unwrap();
        assert!(c2 >= c1);
    }

    #[test]
    fn dos_energy_growth_agreement() {
        let (dos, sing) = energy_growth_leading(0.01).unwrap();
        assert!((dos / sing - 1.0).abs() < 5e-3, "dos {dos} vs singular {sing}");
        // magnitude anchor: 1.5e8 at sigma = 0.01
        assert!((sing - 1.5e8).abs() < 1e-3 * 1.5e8);
    }
}
