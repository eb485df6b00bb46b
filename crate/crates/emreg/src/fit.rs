//! Coefficient extraction: sample Gamma (or Gamma-hat) on a sigma grid, fit
//! the Laurent-plus-logarithm model by column-scaled least squares, and
//! report the constant term with diagnostics.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::euler_maclaurin::{
    gamma_shifted, select_n0, tail_bound_epsilon, EmConfig, SummandFamily,
};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Which basis functions enter the fit. `sigma_powers` are real exponents
/// (positive powers admit the entire parts of the sampled function;
/// half-integer exponents appear with non-unit regulator powers);
/// `log_powers` are the powers of ln(sigma), normally just {1}.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelSpec {
    pub log_powers: Vec<u32>,
    pub sigma_powers: Vec<f64>,
}

impl ModelSpec {
    /// The reduced form c_L ln(sigma) + sum_{j=0}^{n_big} c_j sigma^{-j}.
    pub fn reduced(n_big: u32) -> ModelSpec {
        ModelSpec {
            log_powers: vec![1],
            sigma_powers: (0..=n_big).map(|j| -(j as f64)).collect(),
        }
    }

    /// Reduced form plus positive powers 1..=pos (suppresses the bias from
    /// the entire part of Gamma when the grid does not reach sigma -> 0).
    pub fn with_positive_powers(n_big: u32, pos: u32) -> ModelSpec {
        let mut m = Self::reduced(n_big);
        m.sigma_powers.extend((1..=pos).map(f64::from));
        m
    }

    pub fn column_count(&self) -> usize {
        self.log_powers.len() + self.sigma_powers.len()
    }

    fn columns<T: Scalar>(&self, sigma: T) -> Vec<T> {
        let ln_s = sigma.ln();
        let mut row = Vec::with_capacity(self.column_count());
        for &lp in &self.log_powers {
            row.push(ln_s.powi(lp as i32));
        }
        for &sp in &self.sigma_powers {
            if sp == sp.round() && sp.abs() < 64.0 {
                row.push(sigma.powi(sp as i32));
            } else {
                row.push((ln_s * T::from_f64(sp)).exp());
            }
        }
        row
    }
}

/// Fitted model: coefficients aligned with the spec's column order,
/// residual norm, and a condition estimate of the scaled design matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LaurentLogModel {
    pub spec: ModelSpec,
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub condition: f64,
}

impl LaurentLogModel {
    pub fn log_coefficient(&self, log_power: u32) -> Option<f64> {
        self.spec
            .log_powers
            .iter()
            .position(|&p| p == log_power)
            .map(|i| self.coefficients[i])
    }

    pub fn sigma_coefficient(&self, power: f64) -> Option<f64> {
        self.spec
            .sigma_powers
            .iter()
            .position(|&p| (p - power).abs() < 1e-12)
            .map(|i| self.coefficients[self.spec.log_powers.len() + i])
    }

    /// The constant term c_{0,0}.
    pub fn constant(&self) -> f64 {
        self.sigma_coefficient(0.0).unwrap_or(f64::NAN)
    }
}

/// Householder least squares on a column-scaled design matrix; returns
/// (solution, residual_norm, condition_estimate).
fn scaled_least_squares<T: Scalar>(
    rows: &mut [Vec<T>],
    rhs: &mut [T],
) -> Result<(Vec<T>, T, f64)> {
    let nrows = rows.len();
    let ncols = rows[0].len();
    if nrows < ncols {
        return Err(Error::InvalidConfig(format!(
            "{nrows} samples cannot determine {ncols} coefficients"
        )));
    }
    // scale columns to unit max magnitude
    let mut scale = vec![T::one(); ncols];
    for j in 0..ncols {
        let mut mx = T::zero();
        for row in rows.iter() {
            if row[j].abs() > mx {
                mx = row[j].abs();
            }
        }
        if mx.to_f64() == 0.0 {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        scale[j] = mx;
        for row in rows.iter_mut() {
            row[j] = row[j] / mx;
        }
    }
    // Householder QR with application to rhs
    let mut r_diag = vec![T::zero(); ncols];
    for j in 0..ncols {
        let mut norm2 = T::zero();
        for row in rows.iter().skip(j) {
            norm2 = norm2 + row[j] * row[j];
        }
        let norm = norm2.sqrt();
        if norm.to_f64() == 0.0 {
            return Err(Error::IllConditioned { condition: f64::INFINITY });
        }
        let alpha = if rows[j][j].to_f64() > 0.0 { -norm } else { norm };
        r_diag[j] = alpha;
        // v = x - alpha e_j (stored in place)
        rows[j][j] = rows[j][j] - alpha;
        let mut vnorm2 = T::zero();
        for row in rows.iter().skip(j) {
            vnorm2 = vnorm2 + row[j] * row[j];
        }
        if vnorm2.to_f64() == 0.0 {
            continue;
        }
        for k in j + 1..ncols {
            let mut dot = T::zero();
            for row in rows.iter().skip(j) {
                dot = dot + row[j] * row[k];
            }
            let c = (T::one() + T::one()) * dot / vnorm2;
            for row in rows.iter_mut().skip(j) {
                let vj = row[j];
                row[k] = row[k] - c * vj;
            }
        }
        let mut dot = T::zero();
        for (row, r) in rows.iter().zip(rhs.iter()).skip(j) {
            dot = dot + row[j] * *r;
        }
        let c = (T::one() + T::one()) * dot / vnorm2;
        for (row, r) in rows.iter().zip(rhs.iter_mut()).skip(j) {
            *r = *r - c * row[j];
        }
    }
    // condition estimate from the R diagonal
    let mut dmax = 0.0f64;
    let mut dmin = f64::INFINITY;
    for d in &r_diag {
        let a = d.to_f64().abs();
        dmax = dmax.max(a);
        dmin = dmin.min(a);
    }
    let condition = dmax / dmin;
    if !condition.is_finite() || condition > 1e15 {
        return Err(Error::IllConditioned { condition });
    }
    // back substitution: R x = Q^T b. R's strict upper part lives where the
    // Householder loop left it only for k > j columns of already-reduced
    // rows; reconstruct R from the transformed rows.
    let mut x = vec![T::zero(); ncols];
    for j in (0..ncols).rev() {
        let mut acc = rhs[j];
        for k in j + 1..ncols {
            acc = acc - rows[j][k] * x[k];
        }
        x[j] = acc / r_diag[j];
    }
    let mut res2 = T::zero();
    for r in rhs.iter().skip(ncols) {
        res2 = res2 + *r * *r;
    }
    let solution = x.iter().zip(&scale).map(|(&xi, &si)| xi / si).collect();
    Ok((solution, res2.sqrt(), condition))
}

/// Least-squares fit of (sigma, Gamma) samples to the model.
pub fn fit_laurent_log(samples: &[(f64, f64)], spec: &ModelSpec) -> Result<LaurentLogModel> {
    if samples.len() < 2 * spec.column_count() {
        return Err(Error::InvalidConfig(format!(
            "need at least {} samples for {} coefficients, got {}",
            2 * spec.column_count(),
            spec.column_count(),
            samples.len()
        )));
    }
    let mut rows: Vec<Vec<f64>> = samples.iter().map(|&(s, _)| spec.columns(s)).collect();
    let mut rhs: Vec<f64> = samples.iter().map(|&(_, g)| g).collect();
    let (coefficients, residual, condition) = scaled_least_squares(&mut rows, &mut rhs)?;
    Ok(LaurentLogModel { spec: spec.clone(), coefficients, residual_norm: residual, condition })
}

/// Double-double variant for the high-precision sampling path.
pub fn fit_laurent_log_dd(
    samples: &[(Dd, Dd)],
    spec: &ModelSpec,
) -> Result<(Vec<Dd>, f64, f64)> {
    if samples.len() < spec.column_count() {
        return Err(Error::InvalidConfig("fewer samples than coefficients".into()));
    }
    let mut rows: Vec<Vec<Dd>> = samples.iter().map(|&(s, _)| spec.columns(s)).collect();
    let mut rhs: Vec<Dd> = samples.iter().map(|&(_, g)| g).collect();
    let (coefficients, residual, condition) = scaled_least_squares(&mut rows, &mut rhs)?;
    Ok((coefficients, residual.to_f64(), condition))
}

/// One singular term of the fitted/analytic decomposition.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct SingularTerm {
    pub log_power: u32,
    pub sigma_power: f64,
    pub coefficient: f64,
}

/// Outcome of a regularization: the assigned finite value, the rigorous
/// remainder bound, the singular coefficients, and fit diagnostics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularizationReport {
    pub beta: f64,
    pub beta_fitted: Option<f64>,
    pub beta_analytic: Option<f64>,
    pub epsilon_bound: f64,
    pub singular_terms: Vec<SingularTerm>,
    pub n: u32,
    pub n0: u32,
    pub m: u32,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub grid_points: usize,
    pub fit_residual: f64,
    pub fit_condition: f64,
    pub precision: &'static str,
}

impl RegularizationReport {
    /// Invariant from the report contract: no singular entry may be a
    /// plain nonnegative power without a log factor.
    pub fn check_singular_invariant(&self) -> bool {
        self.singular_terms.iter().all(|t| t.log_power > 0 || t.sigma_power < 0.0)
    }
}

/// Sample Gamma-hat over the grid and extract the regularized value.
///
/// Families exposing the double-double path are sampled there (the raw sums
/// reach ~1e18 where f64 carries no digits of the constant); the sigma-zero
/// series constant, when a family provides it, is the reported value, with
/// the fit kept as a cross-check and as the source of the singular parts
/// not known analytically.
pub fn extract_beta(
    f: &dyn SummandFamily,
    config: &EmConfig,
    spec: &ModelSpec,
) -> Result<RegularizationReport> {
    config.validate()?;
    let n = config.n;
    let n0 = match config.n0 {
        Some(v) => v,
        None => select_n0(f, n, config.m, &config.sigma_grid),
    };
    let m = config.m;

    let use_dd = f.gamma_dd(n, n0, m, Dd::from_f64(config.sigma_grid[0])).is_some();
    let (model_coeffs, fit_residual, fit_condition, beta_fitted);
    if use_dd {
        let samples: Vec<(Dd, Dd)> = config
            .sigma_grid
            .iter()
            .map(|&s| {
                let sd = Dd::from_f64(s);
                (sd, f.gamma_dd(n, n0, m, sd).expect("dd path advertised"))
            })
            .collect();
        let (coeffs, res, cond) = fit_laurent_log_dd(&samples, spec)?;
        let zero_idx = spec.log_powers.len()
            + spec
                .sigma_powers
                .iter()
                .position(|&p| p == 0.0)
                .ok_or_else(|| Error::InvalidConfig("model lacks a constant column".into()))?;
        beta_fitted = coeffs[zero_idx].to_f64();
        model_coeffs = coeffs.iter().map(|c| c.to_f64()).collect::<Vec<f64>>();
        fit_residual = res;
        fit_condition = cond;
    } else {
        let samples: Vec<(f64, f64)> = config
            .sigma_grid
            .iter()
            .map(|&s| Ok((s, gamma_shifted(f, n, n0, m, s, config.quad_rel_tol)?)))
            .collect::<Result<_>>()?;
        let model = fit_laurent_log(&samples, spec)?;
        beta_fitted = model.constant();
        fit_residual = model.residual_norm;
        fit_condition = model.condition;
        model_coeffs = model.coefficients;
    }

    let beta_analytic = f.analytic_beta(n, n0, m);
    let beta = beta_analytic.unwrap_or(beta_fitted);

    // remainder bound in the sigma -> 0+ limit when the family supports it,
    // otherwise at the smallest grid point
    let epsilon_bound = tail_bound_epsilon(f, n0, m, 0.0, 1e-7)
        .or_else(|_| tail_bound_epsilon(f, n0, m, config.sigma_grid[0], 1e-7))?;

    // singular terms: analytic when available, else read from the fit
    let singular_terms = match f.analytic_singular(n, n0, m) {
        Some(terms) => terms
            .into_iter()
            .map(|(log_power, sigma_power, coefficient)| SingularTerm {
                log_power,
                sigma_power,
                coefficient,
            })
            .collect(),
        None => {
            let mut out = Vec::new();
            for (i, &lp) in spec.log_powers.iter().enumerate() {
                out.push(SingularTerm {
                    log_power: lp,
                    sigma_power: 0.0,
                    coefficient: model_coeffs[i],
                });
            }
            for (i, &sp) in spec.sigma_powers.iter().enumerate() {
                if sp < 0.0 {
                    out.push(SingularTerm {
                        log_power: 0,
                        sigma_power: sp,
                        coefficient: model_coeffs[spec.log_powers.len() + i],
                    });
                }
            }
            out
        }
    };

    Ok(RegularizationReport {
        beta,
        beta_fitted: Some(beta_fitted),
        beta_analytic,
        epsilon_bound,
        singular_terms,
        n,
        n0,
        m,
        sigma_min: config.sigma_grid[0],
        sigma_max: *config.sigma_grid.last().unwrap(),
        grid_points: config.sigma_grid.len(),
        fit_residual,
        fit_condition,
        precision: if use_dd { "double-double" } else { "f64" },
    })
}

/// One row of the (m, N) scan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanRow {
    pub m: u32,
    pub n_big: u32,
    pub c0: f64,
    pub epsilon: f64,
}

/// Scan of the reduced-model fit over (m, N) with plateau detection:
/// the selected pair minimizes |c0(N) - c0(N+1)| at fixed m, tie-broken to
/// the smallest N.
pub fn model_scan(
    f: &dyn SummandFamily,
    config: &EmConfig,
    n_big_range: (u32, u32),
    m_range: (u32, u32),
) -> Result<(Vec<ScanRow>, (u32, u32))> {
    config.validate()?;
    if n_big_range.0 > n_big_range.1 || m_range.0 > m_range.1 {
        return Err(Error::InvalidConfig("empty scan ranges".into()));
    }
    let n = config.n;
    let mut rows = Vec::new();
    let mut best: Option<((u32, u32), f64)> = None;
    let mut min_eps = f64::INFINITY;
    for m in m_range.0..=m_range.1 {
        let n0 = match config.n0 {
            Some(v) => v,
            None => select_n0(f, n, m, &config.sigma_grid),
        };
        let use_dd = f.gamma_dd(n, n0, m, Dd::from_f64(config.sigma_grid[0])).is_some();
        let eps = tail_bound_epsilon(f, n0, m, 0.0, 1e-7)
            .or_else(|_| tail_bound_epsilon(f, n0, m, config.sigma_grid[0], 1e-7))?;
        min_eps = min_eps.min(eps);
        let samples_dd: Option<Vec<(Dd, Dd)>> = use_dd.then(|| {
            config
                .sigma_grid
                .iter()
                .map(|&s| {
                    let sd = Dd::from_f64(s);
                    (sd, f.gamma_dd(n, n0, m, sd).expect("dd path advertised"))
                })
                .collect()
        });
        let samples_f64: Option<Vec<(f64, f64)>> = if use_dd {
            None
        } else {
            Some(
                config
                    .sigma_grid
                    .iter()
                    .map(|&s| Ok((s, gamma_shifted(f, n, n0, m, s, config.quad_rel_tol)?)))
                    .collect::<Result<_>>()?,
            )
        };
        let mut c_prev: Option<f64> = None;
        for n_big in n_big_range.0..=n_big_range.1 {
            let spec = ModelSpec::reduced(n_big);
            let c0 = if let Some(s) = &samples_dd {
                let (coeffs, _, _) = fit_laurent_log_dd(s, &spec)?;
                coeffs[spec.log_powers.len()].to_f64()
            } else {
                fit_laurent_log(samples_f64.as_ref().unwrap(), &spec)?.constant()
            };
            rows.push(ScanRow { m, n_big, c0, epsilon: eps });
            if let Some(p) = c_prev {
                let jump = (c0 - p).abs();
                if best.map_or(true, |(_, b)| jump < b) {
                    best = Some(((m, n_big - 1), jump));
                }
            }
            c_prev = Some(c0);
        }
    }
    let (selected, spread) = best.ok_or_else(|| Error::InvalidConfig("scan too small".into()))?;
    if spread > 10.0 * min_eps.max(1e-300) {
        return Err(Error::NoPlateau { spread, bound: min_eps });
    }
    Ok((rows, selected))
}
