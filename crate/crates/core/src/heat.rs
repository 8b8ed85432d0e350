//! Heat trace, small-time asymptotics, spectral zeta function and ζ′(0).
//!
//! θ(t) = Σ e^{−λ_k t} over nonzero eigenvalues. Near t = 0 it behaves as
//! b₋₁/t + b₀ + b₁t + …, with b₋₁ equal to the volume in the normalisation
//! of [`crate::basis`]. ζ′(0) is assembled from the Mellin representation
//! split at t = 1:
//!
//! ζ′(0) = Σ E₁(λ_k) − b₋₁ + γ·b₀ + ∫₀¹ (θ − b₋₁/t − b₀)/t dt.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::basis::OperatorPair;
use crate::eigen::{generalized_eigs, CholeskyFactor, Spectrum};
use crate::error::{Error, Result};
use crate::linalg::{matmul, matmul_tn};
use crate::special::{adaptive_integrate, exp_e1, gauss_legendre_on, pairwise_sum, SmoothStep, EULER_GAMMA};

/// Default relative truncation tolerance defining the fit window.
pub const WINDOW_RTOL: f64 = 1e-5;
/// Default ratio t_hi/t_lo.
pub const WINDOW_SPAN: f64 = 10.0;
pub const WINDOW_NODES: usize = 25;
/// Default polynomial degree of the fitted remainder b₀ + b₁t + … + b_d t^d.
pub const FIT_DEGREE: usize = 3;

/// θ(t) over nonzero eigenvalues.
pub fn theta(spectrum: &Spectrum, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("theta needs t > 0, got {t}")));
    }
    Ok(theta_unchecked(spectrum.nonzero(), t))
}

fn theta_unchecked(nonzero: &[f64], t: f64) -> f64 {
    // Largest eigenvalues first: smallest terms are added first.
    nonzero.iter().rev().map(|l| (-l * t).exp()).sum()
}

/// e^{−λ_acc t}·(n − n_acc + vol/t): size of the heat-trace contribution of
/// the modes above the continuum-accurate cutoff, plus the missing tail.
pub fn truncation_bound(spectrum: &Spectrum, t: f64) -> f64 {
    let n = spectrum.len();
    let idx = spectrum.accurate_index();
    let lam = spectrum.eigenvalues[idx];
    (-lam * t).exp() * ((n - idx) as f64 + spectrum.weyl_coefficient / t)
}

pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(Error::Domain(format!(
            "geometric grid needs 0 < lo < hi and count >= 2 (got {lo}, {hi}, {count})"
        )));
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { hi } else { lo * (r * i as f64).exp() })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceSamples {
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub trunc_error_bound: Vec<f64>,
}

impl HeatTraceSamples {
    /// Samples from explicit values, e.g. a synthetic model.
    pub fn new(t_grid: Vec<f64>, values: Vec<f64>, trunc_error_bound: Vec<f64>) -> Result<Self> {
        if t_grid.len() != values.len() || t_grid.len() != trunc_error_bound.len() {
            return Err(Error::Domain("sample columns have different lengths".into()));
        }
        if t_grid.windows(2).any(|w| w[0] >= w[1]) || t_grid.first().is_some_and(|&t| t <= 0.0) {
            return Err(Error::Domain("t_grid must be positive and strictly ascending".into()));
        }
        Ok(Self {
            t_grid,
            values,
            trunc_error_bound,
        })
    }

    pub fn from_spectrum(spectrum: &Spectrum, t_grid: &[f64]) -> Result<Self> {
        let values = t_grid
            .iter()
            .map(|&t| theta(spectrum, t))
            .collect::<Result<Vec<_>>>()?;
        let bounds = t_grid.iter().map(|&t| truncation_bound(spectrum, t)).collect();
        Self::new(t_grid.to_vec(), values, bounds)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t_grid[0], *self.t_grid.last().unwrap())
    }
}

/// Smallest t with truncation_bound(t) ≤ rtol·θ(t), by bisection in ln t.
pub fn window_start(spectrum: &Spectrum, rtol: f64) -> Result<f64> {
    let lam1 = spectrum.lambda1()?;
    let ok = |t: f64| truncation_bound(spectrum, t) <= rtol * theta_unchecked(spectrum.nonzero(), t);
    let mut hi = 1.0 / spectrum.accurate_cutoff();
    let limit = 200.0 / lam1;
    while !ok(hi) {
        hi *= 2.0;
        if hi > limit {
            return Err(Error::FitWindow {
                lo: hi,
                hi: limit,
                reason: format!("truncation bound never drops below {rtol}·theta"),
            });
        }
    }
    let mut lo = hi / 2.0;
    while ok(lo) && lo > 1e-12 {
        lo /= 2.0;
    }
    for _ in 0..60 {
        let mid = (lo * hi).sqrt();
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The default fit grid: WINDOW_NODES geometric nodes on [t_lo, 10·t_lo].
pub fn default_fit_grid(spectrum: &Spectrum) -> Result<Vec<f64>> {
    let lo = window_start(spectrum, WINDOW_RTOL)?;
    geometric_grid(lo, WINDOW_SPAN * lo, WINDOW_NODES)
}

/// Checks that every node of the grid lies in the validity region.
pub fn validate_window(samples: &HeatTraceSamples, rtol: f64) -> Result<()> {
    let (lo, hi) = samples.window();
    for ((&t, &v), &b) in samples
        .t_grid
        .iter()
        .zip(&samples.values)
        .zip(&samples.trunc_error_bound)
    {
        if b > rtol * v {
            return Err(Error::FitWindow {
                lo,
                hi,
                reason: format!("truncation bound {b:e} exceeds {rtol:e}·theta at t = {t}"),
            });
        }
    }
    Ok(())
}

/// θ(t) ≈ b₋₁/t + b₀ + b₁t + … + b_d t^d on the window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFit {
    pub b_minus1: f64,
    pub b_0: f64,
    pub b_1: f64,
    /// All fitted coefficients of the regular part, b₀ … b_d.
    pub regular: Vec<f64>,
    pub fit_window: (f64, f64),
    /// max |θ − fitted model| on the window nodes.
    pub residual: f64,
    /// max |θ − (b₋₁/t + b₀ + b₁t)| on the window nodes.
    pub three_term_residual: f64,
}

impl AsymptoticFit {
    pub fn degree(&self) -> usize {
        self.regular.len() - 1
    }

    pub fn model(&self, t: f64) -> f64 {
        self.b_minus1 / t + self.regular.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// ∫₀^{t_lo} (model − b₋₁/t − b₀)/t dt = Σ_{k≥1} b_k t_lo^k / k.
    fn small_time_remainder(&self) -> f64 {
        let t = self.fit_window.0;
        self.regular
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * t.powi(k as i32) / k as f64)
            .sum()
    }
}

/// Weighted least squares (weights t²) of θ against {1/t, 1, t, …, t^degree}.
pub fn fit_asymptotics(samples: &HeatTraceSamples, degree: usize) -> Result<AsymptoticFit> {
    let (lo, hi) = samples.window();
    let m = samples.t_grid.len();
    if degree < 1 || m < degree + 2 {
        return Err(Error::FitWindow {
            lo,
            hi,
            reason: format!("{m} samples cannot determine a degree-{degree} model"),
        });
    }
    validate_window(samples, WINDOW_RTOL)?;
    let cols = degree + 2;
    let a = DMatrix::from_fn(m, cols, |i, j| {
        let t = samples.t_grid[i];
        // Row scaled by t, i.e. weight t².
        if j == 0 {
            1.0
        } else {
            t.powi(j as i32)
        }
    });
    let rhs = DVector::from_fn(m, |i, _| samples.t_grid[i] * samples.values[i]);
    // Column equilibration for conditioning.
    let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm()).collect();
    let mut a_eq = a.clone();
    for (j, n) in norms.iter().enumerate() {
        a_eq.column_mut(j).scale_mut(1.0 / n);
    }
    let sol = a_eq
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::FitWindow {
            lo,
            hi,
            reason: format!("least-squares solve failed: {e}"),
        })?;
    let coeffs: Vec<f64> = sol.iter().zip(&norms).map(|(c, n)| c / n).collect();
    let b_minus1 = coeffs[0];
    let regular = coeffs[1..].to_vec();
    let mut residual = 0.0f64;
    let mut three = 0.0f64;
    let fit = AsymptoticFit {
        b_minus1,
        b_0: regular[0],
        b_1: regular[1],
        regular,
        fit_window: (lo, hi),
        residual: 0.0,
        three_term_residual: 0.0,
    };
    for (&t, &v) in samples.t_grid.iter().zip(&samples.values) {
        residual = residual.max((v - fit.model(t)).abs());
        three = three.max((v - (fit.b_minus1 / t + fit.b_0 + fit.b_1 * t)).abs());
    }
    Ok(AsymptoticFit {
        residual,
        three_term_residual: three,
        ..fit
    })
}

/// Fit on the default window of a spectrum.
pub fn fit_spectrum(spectrum: &Spectrum, degree: usize) -> Result<AsymptoticFit> {
    let grid = default_fit_grid(spectrum)?;
    let samples = HeatTraceSamples::from_spectrum(spectrum, &grid)?;
    fit_asymptotics(&samples, degree)
}

/// The pieces of ζ′(0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZetaPrimeZero {
    pub value: f64,
    /// ∫₁^∞ θ/t = Σ E₁(λ_k).
    pub large_time: f64,
    /// ∫_{t_lo}^1 (θ − b₋₁/t − b₀)/t by adaptive quadrature.
    pub middle: f64,
    /// ∫₀^{t_lo} of the same integrand from the fitted model.
    pub small_time: f64,
    pub error_budget: f64,
    /// Σ E₁ + γ·b₋₁ − b₀ + ∫₀¹ρ/t.
    pub statement_variant: f64,
    /// Σ E₁ + b₋₁ + b₀ + ∫₀¹ρ/t.
    pub proof_variant: f64,
}

fn zeta_prime_parts(spectrum: &Spectrum, fit: &AsymptoticFit) -> Result<(f64, f64, f64, f64)> {
    let lam1 = spectrum.lambda1()?;
    if lam1 <= 0.0 {
        return Err(Error::Spectrum(format!("lambda_1 = {lam1} is not positive")));
    }
    let nz = spectrum.nonzero();
    let e1: Vec<f64> = nz.iter().rev().map(|&l| exp_e1(l)).collect();
    let large_time = pairwise_sum(&e1);
    let (bm, b0) = (fit.b_minus1, fit.b_0);
    let t_lo = fit.fit_window.0;
    let rho = |t: f64| (theta_unchecked(nz, t) - bm / t - b0) / t;
    let (middle, quad_err) = if t_lo < 1.0 {
        adaptive_integrate(&rho, t_lo, 1.0, 1e-12)
    } else {
        let (v, e) = adaptive_integrate(&rho, 1.0, t_lo, 1e-12);
        (-v, e)
    };
    Ok((large_time, middle, fit.small_time_remainder(), quad_err))
}

/// ζ′(0) from a spectrum and its small-time fit.
///
/// The budget is the spread against a degree-lowered fit on the same
/// window, plus the fit residual propagated through ∫ dt/t, plus the
/// truncation bound over the window.
pub fn zeta_prime_zero(spectrum: &Spectrum, fit: &AsymptoticFit) -> Result<ZetaPrimeZero> {
    let (large_time, middle, small_time, quad_err) = zeta_prime_parts(spectrum, fit)?;
    let (bm, b0) = (fit.b_minus1, fit.b_0);
    let rho_integral = middle + small_time;
    let value = large_time - bm + EULER_GAMMA * b0 + rho_integral;
    let t_lo = fit.fit_window.0;
    let mut budget = quad_err + fit.residual * (1.0 + (1.0 / t_lo).ln().max(0.0));
    budget += truncation_bound(spectrum, t_lo) * (1.0 + (1.0 / t_lo).ln().abs());
    if fit.degree() > 1 {
        let grid = geometric_grid(fit.fit_window.0, fit.fit_window.1, WINDOW_NODES)?;
        let samples = HeatTraceSamples::from_spectrum(spectrum, &grid)?;
        let lower = fit_asymptotics(&samples, fit.degree() - 1)?;
        let (lt, mid, st, _) = zeta_prime_parts(spectrum, &lower)?;
        let alt = lt - lower.b_minus1 + EULER_GAMMA * lower.b_0 + mid + st;
        budget += (alt - value).abs();
    }
    Ok(ZetaPrimeZero {
        value,
        large_time,
        middle,
        small_time,
        error_budget: budget,
        statement_variant: large_time + EULER_GAMMA * bm - b0 + rho_integral,
        proof_variant: large_time + bm + b0 + rho_integral,
    })
}

/// ζ(s) from the eigenvalue sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaValue {
    pub s: f64,
    /// Σ λ_k^{−s} over the computed nonzero eigenvalues.
    pub raw_sum: f64,
    /// Smoothed sum plus the Weyl-law continuation above the accurate cutoff.
    pub value: f64,
    /// Sensitivity of `value` to the smoothing interval.
    pub tail_bound: f64,
}

fn smoothed_weyl_sum(spectrum: &Spectrum, s: f64, a: f64) -> f64 {
    let cut = spectrum.accurate_cutoff();
    let w = spectrum.weyl_coefficient;
    let bump = SmoothStep;
    let chi = |l: f64| 1.0 - bump.value((l / cut - a) / (1.0 - a));
    let terms: Vec<f64> = spectrum
        .nonzero()
        .iter()
        .rev()
        .map(|&l| l.powf(-s) * chi(l))
        .collect();
    let head = pairwise_sum(&terms);
    let (mid, _) = adaptive_integrate(&|l: f64| l.powf(-s) * (1.0 - chi(l)), a * cut, cut, 1e-14);
    head + w * (mid + cut.powf(1.0 - s) / (s - 1.0))
}

/// ζ(s) = Σ λ_k^{−s} for s > 1.
pub fn zeta(spectrum: &Spectrum, s: f64) -> Result<ZetaValue> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::Domain(format!("zeta(s) needs s > 1, got {s}")));
    }
    spectrum.lambda1()?;
    let terms: Vec<f64> = spectrum.nonzero().iter().rev().map(|&l| l.powf(-s)).collect();
    let raw_sum = pairwise_sum(&terms);
    let value = smoothed_weyl_sum(spectrum, s, 0.3);
    let alt = smoothed_weyl_sum(spectrum, s, 0.5);
    Ok(ZetaValue {
        s,
        raw_sum,
        value,
        tail_bound: (value - alt).abs(),
    })
}

/// ζ(s) by Mellin quadrature of θ, with the fitted model on (0, t_lo).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinZeta {
    pub s: f64,
    pub value: f64,
    pub error_budget: f64,
}

fn mellin_value(spectrum: &Spectrum, fit: &AsymptoticFit, s: f64) -> Result<(f64, f64)> {
    let lam1 = spectrum.lambda1()?;
    let nz = spectrum.nonzero();
    let t_lo = fit.fit_window.0;
    let t_end = (60.0 / lam1).max(2.0 * t_lo);
    let f = |t: f64| t.powf(s - 1.0) * theta_unchecked(nz, t);
    // Geometric panels resolve the decay scales of θ.
    let mut edges = vec![t_lo];
    while *edges.last().unwrap() * 4.0 < t_end {
        let next = edges.last().unwrap() * 4.0;
        edges.push(next);
    }
    edges.push(t_end);
    let mut body = 0.0;
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (v, e) = adaptive_integrate(&f, w[0], w[1], 1e-13);
        body += v;
        err += e;
    }
    let mut head = fit.b_minus1 * t_lo.powf(s - 1.0) / (s - 1.0);
    for (k, c) in fit.regular.iter().enumerate() {
        head += c * t_lo.powf(s + k as f64) / (s + k as f64);
    }
    let g = gamma(s);
    Ok(((body + head) / g, err / g))
}

pub fn zeta_mellin(spectrum: &Spectrum, fit: &AsymptoticFit, s: f64) -> Result<MellinZeta> {
    if !(s > 1.0 && s.is_finite()) {
        return Err(Error::Domain(format!("zeta(s) needs s > 1, got {s}")));
    }
    let (value, quad_err) = mellin_value(spectrum, fit, s)?;
    let mut budget = quad_err + fit.residual * fit.fit_window.0.powf(s) / (s * gamma(s));
    if fit.degree() > 1 {
        let grid = geometric_grid(fit.fit_window.0, fit.fit_window.1, WINDOW_NODES)?;
        let samples = HeatTraceSamples::from_spectrum(spectrum, &grid)?;
        let lower = fit_asymptotics(&samples, fit.degree() - 1)?;
        budget += (mellin_value(spectrum, &lower, s)?.0 - value).abs();
    }
    Ok(MellinZeta {
        s,
        value,
        error_budget: budget,
    })
}

/// Everything the torsion pipeline reports for one spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorsionReport {
    pub metric_id: String,
    pub volume: f64,
    pub lambda1: f64,
    pub kernel_dim: usize,
    pub fit: AsymptoticFit,
    /// ζ(0) = b₀ for the kernel-free trace.
    pub zeta0: f64,
    /// b₀ + kernel_dim, the constant term of the full trace Tr e^{−tΔ}.
    pub zeta0_full_trace: f64,
    pub zeta_prime0: ZetaPrimeZero,
    pub zeta_at: Vec<ZetaValue>,
    pub zeta_mellin: Vec<MellinZeta>,
}

pub fn torsion_report(spectrum: &Spectrum, s_values: &[f64]) -> Result<TorsionReport> {
    let fit = fit_spectrum(spectrum, FIT_DEGREE)?;
    let zp = zeta_prime_zero(spectrum, &fit)?;
    let zeta_at = s_values
        .iter()
        .map(|&s| zeta(spectrum, s))
        .collect::<Result<Vec<_>>>()?;
    let zeta_mellin = s_values
        .iter()
        .map(|&s| zeta_mellin(spectrum, &fit, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(TorsionReport {
        metric_id: spectrum.metric_id.clone(),
        volume: spectrum.weyl_coefficient,
        lambda1: spectrum.lambda1()?,
        kernel_dim: spectrum.kernel_dim,
        zeta0: fit.b_0,
        zeta0_full_trace: fit.b_0 + spectrum.kernel_dim as f64,
        zeta_prime0: zp,
        fit,
        zeta_at,
        zeta_mellin,
    })
}

/// e^{−tΔ} = V·diag(e^{−λ_k t})·VᵀM.
pub fn heat_operator(spectrum: &Spectrum, m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("heat operator needs t > 0, got {t}")));
    }
    spectrum.spectral_function(m, |l| (-l * t).exp())
}

/// Discrete Laplacian M⁻¹K.
pub fn laplacian_matrix(pair: &OperatorPair) -> Result<DMatrix<f64>> {
    let chol = CholeskyFactor::new(&pair.m)?;
    let linv = chol.l_inv();
    // M⁻¹ = L⁻ᵀL⁻¹.
    Ok(matmul(&matmul_tn(linv, linv), &pair.k))
}

/// Outcome of the Duhamel check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    /// ‖∂_uE + ∫₀ᵗ E(t−s)(∂_uΔ)E(s) ds‖_M.
    pub residual: f64,
    /// ‖∂_uE‖_M.
    pub derivative_norm: f64,
}

/// Duhamel's formula along a one-parameter pencil family, from the pencils
/// at u − h, u, u + h. The s-integral is evaluated entrywise in the
/// eigenbasis of Δ_u with `quad_nodes` Gauss–Legendre nodes.
pub fn duhamel_residual(
    minus: &OperatorPair,
    center: &OperatorPair,
    plus: &OperatorPair,
    h: f64,
    t: f64,
    quad_nodes: usize,
) -> Result<DuhamelReport> {
    if !(h > 0.0 && t > 0.0) || quad_nodes == 0 {
        return Err(Error::Domain("duhamel_residual needs h > 0, t > 0, quad_nodes > 0".into()));
    }
    let sm = generalized_eigs(minus)?;
    let sp = generalized_eigs(plus)?;
    let sc = generalized_eigs(center)?;
    let em = heat_operator(&sm, &minus.m, t)?;
    let ep = heat_operator(&sp, &plus.m, t)?;
    let du_e = (ep - em) / (2.0 * h);
    let du_delta = (laplacian_matrix(plus)? - laplacian_matrix(minus)?) / (2.0 * h);
    let v = sc.eigenvectors.as_ref().expect("eigenvectors requested");
    let lam = &sc.eigenvalues;
    // B = V⁻¹(∂Δ)V with V⁻¹ = VᵀM.
    let vinv = matmul_tn(v, &center.m);
    let b = matmul(&matmul(&vinv, &du_delta), v);
    let (s_nodes, s_w) = gauss_legendre_on(quad_nodes, 0.0, t);
    let n = lam.len();
    let mut g = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let mut acc = 0.0;
            for (s, w) in s_nodes.iter().zip(&s_w) {
                acc += w * (-lam[i] * (t - s) - lam[j] * s).exp();
            }
            g[(i, j)] = acc * b[(i, j)];
        }
    }
    let integral = matmul(&matmul(v, &g), &vinv);
    let chol = CholeskyFactor::new(&center.m)?;
    Ok(DuhamelReport {
        residual: chol.operator_norm(&(&du_e + integral)),
        derivative_norm: chol.operator_norm(&du_e),
    })
}

/// Tr((I+Δ)⁻²) over nonzero modes.
pub fn resolvent_square_trace(spectrum: &Spectrum) -> f64 {
    spectrum.nonzero().iter().rev().map(|l| 1.0 / ((1.0 + l) * (1.0 + l))).sum()
}

/// c_t = sup_{a ≥ 0} e^{−ta}(1+a)², attained at a = 2/t − 1 when t < 2.
pub fn resolvent_trace_constant(t: f64) -> f64 {
    if t < 2.0 {
        let a = 2.0 / t - 1.0;
        (-t * a).exp() * (1.0 + a) * (1.0 + a)
    } else {
        1.0
    }
}

/// max |E(s)E(t) − E(s+t)| over matrix entries.
pub fn semigroup_defect(spectrum: &Spectrum, m: &DMatrix<f64>, s: f64, t: f64) -> Result<f64> {
    let a = heat_operator(spectrum, m, s)?;
    let b = heat_operator(spectrum, m, t)?;
    let c = heat_operator(spectrum, m, s + t)?;
    Ok((matmul(&a, &b) - c).abs().max())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(vals: &[f64]) -> Spectrum {
        Spectrum::from_eigenvalues(vals.to_vec(), "syn", 1.0).unwrap()
    }

    #[test]
    fn theta_direct_sum() {
        let s = spec(&[0.0, 1.0, 2.0]);
        let v = theta(&s, 1.0).unwrap();
        assert!((v - ((-1.0f64).exp() + (-2.0f64).exp())).abs() < 1e-15);
        assert!((v - 0.503_214_724_408_055).abs() < 1e-12);
        assert!(theta(&s, 0.0).is_err());
        let big = theta(&spec(&[0.0, 1.0, 1.0, 3.0]), 30.0).unwrap() / (-30.0f64).exp();
        assert!((big - 2.0).abs() < 1e-20f64.max(2.0 * (-60.0f64).exp()) + 1e-12);
    }

    #[test]
    fn exact_model_is_recovered() {
        let grid = geometric_grid(0.02, 0.2, 25).unwrap();
        let vals: Vec<f64> = grid.iter().map(|t| 3.0 / t + 5.0 + 0.1 * t).collect();
        let samples = HeatTraceSamples::new(grid.clone(), vals, vec![0.0; 25]).unwrap();
        for degree in [1, 2, 3] {
            let fit = fit_asymptotics(&samples, degree).unwrap();
            assert!((fit.b_minus1 - 3.0).abs() < 1e-10, "{fit:?}");
            assert!((fit.b_0 - 5.0).abs() < 1e-10);
            assert!((fit.b_1 - 0.1).abs() < 1e-10);
            assert!(fit.residual < 1e-10);
        }
    }

    #[test]
    fn zeta_direct_sum() {
        let s = spec(&[0.0, 1.0, 4.0]);
        let z = zeta(&s, 2.0).unwrap();
        assert!((z.raw_sum - 1.0625).abs() < 1e-15);
        assert!(zeta(&s, 1.0).is_err());
    }

    #[test]
    fn grid_and_constants() {
        let g = geometric_grid(0.1, 10.0, 3).unwrap();
        assert!((g[1] - 1.0).abs() < 1e-15 && g[2] == 10.0);
        assert!(geometric_grid(1.0, 0.5, 3).is_err());
        // c_t maximises e^{-ta}(1+a)².
        for t in [0.1, 0.7, 1.9, 3.0] {
            let c = resolvent_trace_constant(t);
            for i in 0..2000 {
                let a = i as f64 * 0.05;
                assert!((-t * a).exp() * (1.0 + a) * (1.0 + a) <= c * (1.0 + 1e-12));
            }
        }
    }
}
