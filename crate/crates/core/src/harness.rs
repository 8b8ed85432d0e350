//! Sweeps over metric families and the finite-dimensional convergence
//! checks: λ₁ floor, resolvent and heat-operator convergence, variation
//! bounds in the family parameter, and limit-versus-sequence comparisons.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anomaly::{quillen_limit, QuillenData, QuillenLimit};
use crate::basis::{assemble, stiffness, OperatorPair, SpectralBasis};
use crate::eigen::{generalized_eigenvalues, generalized_eigs, CholeskyFactor};
use crate::error::{Error, Result};
use crate::heat::{fit_spectrum, heat_operator, theta, zeta_prime_zero, FIT_DEGREE};
use crate::linalg::matmul;
use crate::metric::{sup_log_distance, volume, ConformalMetric, MetricFamily};
use crate::quadrature::{QuadratureRule, SampleGrid, SpherePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub metric_id: String,
    pub vol: f64,
    pub lambda1: f64,
    pub kernel_dim: usize,
    pub theta: Vec<f64>,
    pub b_minus1: f64,
    pub b_0: f64,
    pub zeta_prime0: f64,
    pub zeta_prime0_budget: f64,
    pub log_quillen: f64,
    pub sup_log_dist_to_limit: Option<f64>,
}

impl SweepRow {
    pub fn quillen(&self, sign: i32) -> QuillenData {
        QuillenData {
            metric_id: self.metric_id.clone(),
            vol: self.vol,
            log_l2: self.vol.ln(),
            zeta_prime0: self.zeta_prime0,
            zeta_prime0_budget: self.zeta_prime0_budget,
            log_quillen: self.log_quillen,
            sign_convention: sign,
        }
    }
}

/// A sweep row or the reason it failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub parameter: f64,
    pub row: Option<SweepRow>,
    pub error: Option<String>,
}

/// The full pipeline for one metric.
pub fn sweep_row(
    basis: &SpectralBasis,
    metric: &ConformalMetric,
    parameter: f64,
    t_set: &[f64],
    sign: i32,
    limit: Option<&ConformalMetric>,
    grid: &SampleGrid,
) -> Result<SweepRow> {
    let pair = assemble(basis, metric)?;
    let spectrum = generalized_eigenvalues(&pair)?;
    let lambda1 = spectrum.lambda1()?;
    let theta = t_set
        .iter()
        .map(|&t| theta(&spectrum, t))
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_spectrum(&spectrum, FIT_DEGREE)?;
    let zp = zeta_prime_zero(&spectrum, &fit)?;
    let vol = volume(metric, basis.quadrature());
    Ok(SweepRow {
        parameter,
        metric_id: metric.id().to_string(),
        vol,
        lambda1,
        kernel_dim: spectrum.kernel_dim,
        theta,
        b_minus1: fit.b_minus1,
        b_0: fit.b_0,
        zeta_prime0: zp.value,
        zeta_prime0_budget: zp.error_budget,
        log_quillen: vol.ln() + sign as f64 * zp.value,
        sup_log_dist_to_limit: limit.map(|l| sup_log_distance(metric, l, grid)),
    })
}

/// One row per parameter; failures are recorded and the sweep continues.
pub fn sweep(
    family: &MetricFamily,
    parameters: &[f64],
    basis: &SpectralBasis,
    t_set: &[f64],
    sign: i32,
    grid: &SampleGrid,
) -> Result<Vec<SweepEntry>> {
    if parameters.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("sweep parameters must be strictly ascending".into()));
    }
    // Shared by every row; built once before the parallel section.
    stiffness(basis);
    Ok(parameters
        .par_iter()
        .map(|&u| {
            let row = family
                .interpolate(u)
                .and_then(|m| sweep_row(basis, &m, u, t_set, sign, family.limit(), grid));
            match row {
                Ok(r) => SweepEntry {
                    parameter: u,
                    row: Some(r),
                    error: None,
                },
                Err(e) => SweepEntry {
                    parameter: u,
                    row: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Quillen convergence table over the successful rows of a sweep.
pub fn quillen_table(
    family: &MetricFamily,
    rows: &[SweepRow],
    sign: i32,
    quadrature: &QuadratureRule,
    grid: &SampleGrid,
) -> Result<QuillenLimit> {
    let members = rows
        .iter()
        .map(|r| Ok((family.interpolate(r.parameter)?, r.quillen(sign))))
        .collect::<Result<Vec<_>>>()?;
    quillen_limit(&members, |i| format!("{}", rows[i].parameter), quadrature, grid)
}

/// sup ρ_metric/ρ_reference over quadrature nodes and grid points: with
/// M ≤ c·M_ref, min-max gives λ₁ ≥ λ₁,ref/c.
pub fn mass_ratio_constant(
    metric: &ConformalMetric,
    reference: &ConformalMetric,
    quadrature: &QuadratureRule,
    grid: &SampleGrid,
) -> f64 {
    quadrature
        .nodes()
        .map(|(p, _)| p)
        .chain(grid.points().iter().copied())
        .map(|p| metric.density(p) / reference.density(p))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FloorReport {
    /// min λ₁ over the rows.
    pub kappa: f64,
    /// Per row λ₁,ref/c.
    pub floors: Vec<f64>,
    /// min over rows of λ₁ − λ₁,ref/c.
    pub margin: f64,
    pub pass: bool,
}

/// Checks λ₁ ≥ λ₁,ref/c row by row from (λ₁, c) pairs.
pub fn lambda1_floor(rows: &[(f64, f64)], reference_lambda1: f64) -> Result<FloorReport> {
    if rows.len() < 2 {
        return Err(Error::Domain("lambda1_floor needs at least two rows".into()));
    }
    let floors: Vec<f64> = rows.iter().map(|&(_, c)| reference_lambda1 / c).collect();
    let kappa = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let margin = rows
        .iter()
        .zip(&floors)
        .map(|(r, f)| r.0 - f)
        .fold(f64::INFINITY, f64::min);
    Ok(FloorReport {
        kappa,
        floors,
        margin,
        pass: margin >= -1e-12 * reference_lambda1,
    })
}

/// A bound of the form diff ≤ C·envelope with C measured on the first pair
/// (times a safety factor) and asserted on the rest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrozenBound {
    pub constant: f64,
    pub violations: Vec<usize>,
}

impl FrozenBound {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn frozen_bound(diffs: &[f64], envelopes: &[f64], safety: f64) -> Result<FrozenBound> {
    if diffs.len() != envelopes.len() || diffs.is_empty() {
        return Err(Error::Domain("frozen_bound needs matching, non-empty columns".into()));
    }
    let constant = if envelopes[0] > 0.0 {
        safety * diffs[0].abs() / envelopes[0]
    } else {
        0.0
    };
    let violations = diffs
        .iter()
        .zip(envelopes)
        .enumerate()
        .skip(1)
        .filter(|(_, (d, e))| d.abs() > constant * **e + 1e-14)
        .map(|(i, _)| i)
        .collect();
    Ok(FrozenBound {
        constant,
        violations,
    })
}

/// Fits v(p) = a + Σ_j c_j p^{−powers[j]} through the points and returns a.
pub fn richardson_limit(params: &[f64], values: &[f64], powers: &[f64]) -> Result<f64> {
    let n = powers.len() + 1;
    if params.len() != n || values.len() != n {
        return Err(Error::Domain(format!(
            "richardson_limit needs {n} points for {} correction terms",
            powers.len()
        )));
    }
    let a = DMatrix::from_fn(n, n, |i, j| if j == 0 { 1.0 } else { params[i].powf(-powers[j - 1]) });
    let b = DVector::from_column_slice(values);
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Domain("richardson system is singular".into()))?;
    Ok(sol[0])
}

/// (I + M⁻¹K)⁻¹ = (M + K)⁻¹M.
pub fn resolvent_matrix(pair: &OperatorPair) -> Result<DMatrix<f64>> {
    let a = &pair.m + pair.k.as_ref();
    let chol = a
        .cholesky()
        .ok_or(Error::IndefiniteMass { pivot: 0, value: f64::NAN })?;
    Ok(chol.solve(&pair.m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventRow {
    pub metric_id: String,
    pub resolvent_diff_to_prev: Option<f64>,
    pub heat_diff_to_prev: Option<f64>,
    pub sup_log_dist_to_prev: Option<f64>,
    pub resolvent_dist_to_limit: Option<f64>,
    pub heat_dist_to_limit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventTable {
    pub rows: Vec<ResolventRow>,
    pub resolvent_bound: FrozenBound,
    pub heat_bound: FrozenBound,
    pub monotone: bool,
}

/// Consecutive resolvent and heat-operator distances in the M-norm of the
/// reference metric, plus distances to the limit metric.
pub fn resolvent_convergence(
    basis: &SpectralBasis,
    metrics: &[ConformalMetric],
    limit: Option<&ConformalMetric>,
    reference: &ConformalMetric,
    heat_t: f64,
    grid: &SampleGrid,
) -> Result<ResolventTable> {
    if metrics.len() < 2 {
        return Err(Error::Domain("resolvent_convergence needs at least two metrics".into()));
    }
    let ref_pair = assemble(basis, reference)?;
    let norm = CholeskyFactor::new(&ref_pair.m)?;
    let ops = |m: &ConformalMetric| -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let pair = assemble(basis, m)?;
        let r = resolvent_matrix(&pair)?;
        let s = generalized_eigs(&pair)?;
        Ok((r, heat_operator(&s, &pair.m, heat_t)?))
    };
    let members: Vec<(DMatrix<f64>, DMatrix<f64>)> = metrics.iter().map(ops).collect::<Result<_>>()?;
    let lim = limit.map(ops).transpose()?;
    let mut rows = Vec::with_capacity(metrics.len());
    let mut rdiffs = Vec::new();
    let mut hdiffs = Vec::new();
    let mut envs = Vec::new();
    for (i, m) in metrics.iter().enumerate() {
        let (r, e) = &members[i];
        let (rd, hd, env) = if i == 0 {
            (None, None, None)
        } else {
            let (rp, ep) = &members[i - 1];
            let rd = norm.operator_norm(&(r - rp));
            let hd = norm.operator_norm(&(e - ep));
            let env = sup_log_distance(m, &metrics[i - 1], grid);
            rdiffs.push(rd);
            hdiffs.push(hd);
            envs.push(env);
            (Some(rd), Some(hd), Some(env))
        };
        let (rl, hl) = match &lim {
            Some((rl, el)) => (Some(norm.operator_norm(&(r - rl))), Some(norm.operator_norm(&(e - el)))),
            None => (None, None),
        };
        rows.push(ResolventRow {
            metric_id: m.id().to_string(),
            resolvent_diff_to_prev: rd,
            heat_diff_to_prev: hd,
            sup_log_dist_to_prev: env,
            resolvent_dist_to_limit: rl,
            heat_dist_to_limit: hl,
        });
    }
    let monotone = rdiffs.windows(2).all(|w| w[1] < w[0]) && hdiffs.windows(2).all(|w| w[1] < w[0]);
    Ok(ResolventTable {
        rows,
        resolvent_bound: frozen_bound(&rdiffs, &envs, 2.0)?,
        heat_bound: frozen_bound(&hdiffs, &envs, 2.0)?,
        monotone,
    })
}

/// ∂_uM for the interpolated family: the Gram matrix weighted by ∂_uρ.
pub fn mass_derivative(basis: &SpectralBasis, family: &MetricFamily, u: f64) -> Result<DMatrix<f64>> {
    family.locate(u)?;
    Ok(basis.weighted_gram(|p| family.density_derivative(u, p).expect("parameter checked")))
}

/// δ̂(u) = sup |∂_u log λ_u⁻¹| over quadrature nodes and grid points.
pub fn delta_hat(family: &MetricFamily, u: f64, quadrature: &QuadratureRule, grid: &SampleGrid) -> Result<f64> {
    let points: Vec<SpherePoint> = quadrature
        .nodes()
        .map(|(p, _)| p)
        .chain(grid.points().iter().copied())
        .collect();
    let mut sup = 0.0f64;
    for p in points {
        sup = sup.max(family.log_inverse_derivative(u, p)?.abs());
    }
    Ok(sup)
}

/// ∂_uΔ = −M⁻¹(∂_uM)M⁻¹K and Δ = M⁻¹K at parameter u.
fn laplacian_and_derivative(basis: &SpectralBasis, family: &MetricFamily, u: f64) -> Result<(OperatorPair, DMatrix<f64>, DMatrix<f64>)> {
    let pair = assemble(basis, &family.interpolate(u)?)?;
    let dm = mass_derivative(basis, family, u)?;
    let chol = pair
        .m
        .clone()
        .cholesky()
        .ok_or(Error::IndefiniteMass { pivot: 0, value: f64::NAN })?;
    let lap = chol.solve(pair.k.as_ref());
    let dlap = -chol.solve(&matmul(&dm, &lap));
    Ok((pair, lap, dlap))
}

/// max over the given vectors of ‖(∂_uΔ)v‖_M / (δ̂(u)·‖Δv‖_M); at most 1.
pub fn laplacian_variation_ratio(
    basis: &SpectralBasis,
    family: &MetricFamily,
    u: f64,
    vectors: &[DVector<f64>],
    grid: &SampleGrid,
) -> Result<f64> {
    let (pair, lap, dlap) = laplacian_and_derivative(basis, family, u)?;
    let dh = delta_hat(family, u, basis.quadrature(), grid)?;
    let mnorm = |w: &DVector<f64>| (w.dot(&(&pair.m * w))).max(0.0).sqrt();
    let mut worst = 0.0f64;
    for v in vectors {
        let lv = &lap * v;
        let denom = dh * mnorm(&lv);
        let num = mnorm(&(&dlap * v));
        if denom > 0.0 {
            worst = worst.max(num / denom);
        } else if num > 1e-14 {
            return Ok(f64::INFINITY);
        }
    }
    Ok(worst)
}

/// ‖∂_u(I + Δ_u)⁻¹‖ in the M_u norm.
pub fn resolvent_derivative_norm(basis: &SpectralBasis, family: &MetricFamily, u: f64) -> Result<f64> {
    let (pair, _, dlap) = laplacian_and_derivative(basis, family, u)?;
    let r = resolvent_matrix(&pair)?;
    let d = -matmul(&matmul(&r, &dlap), &r);
    Ok(CholeskyFactor::new(&pair.m)?.operator_norm(&d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_recovers_polynomial_limit() {
        let ps = [8.0, 16.0, 32.0];
        let vals: Vec<f64> = ps.iter().map(|p: &f64| 1.5 + 2.0 / (p * p) - 3.0 / p.powi(3)).collect();
        assert!((richardson_limit(&ps, &vals, &[2.0, 3.0]).unwrap() - 1.5).abs() < 1e-13);
        assert!(richardson_limit(&ps, &vals, &[2.0]).is_err());
    }

    #[test]
    fn frozen_bound_flags_growth() {
        let b = frozen_bound(&[1.0, 0.5, 3.0], &[1.0, 1.0, 1.0], 2.0).unwrap();
        assert_eq!(b.constant, 2.0);
        assert_eq!(b.violations, vec![2]);
    }

    #[test]
    fn floor_of_constant_rows() {
        let r = lambda1_floor(&[(1.0, 1.0), (1.0, 1.0)], 1.0).unwrap();
        assert_eq!(r.kappa, 1.0);
        assert!(lambda1_floor(&[(1.0, 1.0)], 1.0).is_err());
    }
}
