//! Galerkin discretisation in real spherical harmonics.
//!
//! Basis functions are orthonormal for the normalised round measure μ, so
//! the mass matrix of a metric with density ρ is M_ab = ∫ Y_a Y_b ρ dμ and
//! the Dirichlet form K is metric independent. With this normalisation
//! K = diag(ℓ(ℓ+1)) up to quadrature rounding.

use std::f64::consts::SQRT_2;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{add_gram, max_abs, symmetrize};
use crate::metric::ConformalMetric;
use crate::quadrature::{QuadratureRule, SpherePoint};

const RINGS_PER_CHUNK: usize = 4;

/// Index of (ℓ, m) in the basis: ℓ² + ℓ + m.
pub fn lm_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Inverse of [`lm_index`].
pub fn index_lm(idx: usize) -> (usize, i64) {
    let l = (idx as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= idx { l + 1 } else { l };
    (l, idx as i64 - (l * l + l) as i64)
}

fn assoc_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Normalised associated Legendre functions Q_ℓ^m(x) for 0 ≤ m ≤ ℓ ≤ L and
/// their θ-derivatives, with ∫ Q² dx/2 = 1 and no Condon–Shortley phase.
fn assoc_legendre(l_max: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let size = (l_max + 1) * (l_max + 2) / 2;
    let mut q = vec![0.0; size];
    let mut dq = vec![0.0; size];
    let sin = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
    let mut diag = 1.0;
    for m in 0..=l_max {
        if m > 0 {
            let mf = m as f64;
            diag *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin;
        }
        q[assoc_index(m, m)] = diag;
        if m < l_max {
            q[assoc_index(m + 1, m)] = (2.0 * m as f64 + 3.0).sqrt() * x * diag;
        }
        for l in (m + 2)..=l_max {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let lm1 = lf - 1.0;
            let b = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
            q[assoc_index(l, m)] = a * (x * q[assoc_index(l - 1, m)] - b * q[assoc_index(l - 2, m)]);
        }
    }
    if sin > 0.0 {
        for m in 0..=l_max {
            for l in m..=l_max {
                let (lf, mf) = (l as f64, m as f64);
                let mut v = lf * x * q[assoc_index(l, m)];
                if l > m {
                    let c = ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt();
                    v -= c * q[assoc_index(l - 1, m)];
                }
                dq[assoc_index(l, m)] = v / sin;
            }
        }
    }
    (q, dq)
}

fn trig(m: i64, phi: f64) -> (f64, f64) {
    match m {
        0 => (1.0, 0.0),
        m if m > 0 => {
            let a = m as f64 * phi;
            (SQRT_2 * a.cos(), -(m as f64) * SQRT_2 * a.sin())
        }
        m => {
            let k = (-m) as f64;
            let a = k * phi;
            (SQRT_2 * a.sin(), k * SQRT_2 * a.cos())
        }
    }
}

/// Real spherical harmonics up to degree L with their quadrature rule.
#[derive(Debug)]
pub struct SpectralBasis {
    l_max: usize,
    quadrature: QuadratureRule,
    /// Per ring: Q_ℓ^m and dQ_ℓ^m/dθ in triangular storage.
    q_rings: Vec<(Vec<f64>, Vec<f64>)>,
    stiffness: OnceLock<Arc<DMatrix<f64>>>,
}

impl SpectralBasis {
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn dim(&self) -> usize {
        (self.l_max + 1) * (self.l_max + 1)
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quadrature
    }

    /// Degree ℓ of every basis function, in index order.
    pub fn degrees(&self) -> Vec<usize> {
        (0..self.dim()).map(|i| index_lm(i).0).collect()
    }

    /// All basis functions at one point.
    pub fn evaluate(&self, p: SpherePoint) -> Vec<f64> {
        let (q, _) = assoc_legendre(self.l_max, p.x);
        (0..self.dim())
            .map(|i| {
                let (l, m) = index_lm(i);
                q[assoc_index(l, m.unsigned_abs() as usize)] * trig(m, p.phi).0
            })
            .collect()
    }

    /// Σ c_a Y_a(p).
    pub fn evaluate_expansion(&self, coeffs: &[f64], p: SpherePoint) -> f64 {
        self.evaluate(p).iter().zip(coeffs).map(|(y, c)| y * c).sum()
    }

    /// ∫ Y_a Y_b f dμ for a weight function f, through per-ring Fourier
    /// coefficients of f; equal to the plain node sum up to rounding.
    pub fn weighted_gram<F>(&self, f: F) -> DMatrix<f64>
    where
        F: Fn(SpherePoint) -> f64 + Sync,
    {
        let q = &self.quadrature;
        let kmax = 2 * self.l_max;
        let n_phi = q.n_phi();
        // Per ring: c_k, s_k for k ≤ 2L, pre-multiplied by the ring weight.
        let spectra: Vec<(Vec<f64>, Vec<f64>)> = q
            .rings()
            .par_iter()
            .zip(q.ring_weights().par_iter())
            .map(|(&x, &wr)| {
                let vals: Vec<f64> = q.phis().iter().map(|&phi| f(SpherePoint::new(x, phi))).collect();
                let mut c = vec![0.0; kmax + 1];
                let mut s = vec![0.0; kmax + 1];
                for k in 0..=kmax {
                    let (mut ck, mut sk) = (0.0, 0.0);
                    for (j, v) in vals.iter().enumerate() {
                        let a = k as f64 * q.phis()[j];
                        ck += v * a.cos();
                        sk += v * a.sin();
                    }
                    c[k] = wr * ck / n_phi as f64;
                    s[k] = wr * sk / n_phi as f64;
                }
                (c, s)
            })
            .collect();
        let l_max = self.l_max as i64;
        let n_rings = self.q_rings.len();
        // Q_ℓ^{|m|} over rings, contiguous per (m, ℓ).
        let q_by_m: Vec<Vec<Vec<f64>>> = (0..=self.l_max)
            .map(|m| {
                (m..=self.l_max)
                    .map(|l| self.q_rings.iter().map(|r| r.0[assoc_index(l, m)]).collect())
                    .collect()
            })
            .collect();
        let pairs: Vec<(i64, i64)> = (-l_max..=l_max)
            .flat_map(|ma| (ma..=l_max).map(move |mb| (ma, mb)))
            .collect();
        let blocks: Vec<Vec<f64>> = pairs
            .par_iter()
            .map(|&(ma, mb)| {
                let r: Vec<f64> = spectra.iter().map(|(c, s)| angular_coupling(ma, mb, c, s)).collect();
                let qa = &q_by_m[ma.unsigned_abs() as usize];
                let qb = &q_by_m[mb.unsigned_abs() as usize];
                let mut out = Vec::with_capacity(qa.len() * qb.len());
                let mut t = vec![0.0; n_rings];
                for fa in qa {
                    for ((tj, f), rj) in t.iter_mut().zip(fa).zip(&r) {
                        *tj = f * rj;
                    }
                    for fb in qb {
                        out.push(t.iter().zip(fb).map(|(x, y)| x * y).sum::<f64>());
                    }
                }
                out
            })
            .collect();
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for (&(ma, mb), block) in pairs.iter().zip(&blocks) {
            let la0 = ma.unsigned_abs() as usize;
            let lb0 = mb.unsigned_abs() as usize;
            let width = self.l_max + 1 - lb0;
            for (ia, la) in (la0..=self.l_max).enumerate() {
                let a = lm_index(la, ma);
                for (ib, lb) in (lb0..=self.l_max).enumerate() {
                    let b = lm_index(lb, mb);
                    let v = block[ia * width + ib];
                    g[(a, b)] = v;
                    g[(b, a)] = v;
                }
            }
        }
        g
    }

    /// Gradient of every basis function in the chart coordinates of the
    /// hemisphere containing the ring, times √(w·(1+|z|²)²/4), laid out as
    /// rows (φ-node, component) × columns (basis index).
    fn ring_gradient_rows(&self, ring: usize, out: &mut DMatrix<f64>, row0: usize) {
        let q = &self.quadrature;
        let x = q.rings()[ring];
        let w = q.ring_weights()[ring] * q.phi_weight();
        let (qv, dq) = &self.q_rings[ring];
        let north = x >= 0.0;
        // Chart radius and d(θ_chart)/dr: chart 1 uses θ' = π − θ, φ' = −φ.
        let (s, dtheta_dr, sign) = if north {
            ((1.0 - x) / (1.0 + x), 1.0 + x, 1.0)
        } else {
            ((1.0 + x) / (1.0 - x), 1.0 - x, -1.0)
        };
        let r = s.sqrt();
        let scale = (w * (1.0 + s) * (1.0 + s) / 4.0).sqrt();
        for (k, &phi) in q.phis().iter().enumerate() {
            let phic = sign * phi;
            let (cp, sp) = (phic.cos(), phic.sin());
            for idx in 0..self.dim() {
                let (l, m) = index_lm(idx);
                let ai = assoc_index(l, m.unsigned_abs() as usize);
                let (t, dt) = trig(m, phi);
                // ∂/∂θ' = −∂/∂θ and ∂/∂φ' = −∂/∂φ in the south chart.
                let f_theta = sign * dq[ai] * t;
                let f_phi = sign * qv[ai] * dt;
                let f_r = f_theta * dtheta_dr;
                let gx = f_r * cp - f_phi / r * sp;
                let gy = f_r * sp + f_phi / r * cp;
                out[(row0 + 2 * k, idx)] = scale * gx;
                out[(row0 + 2 * k + 1, idx)] = scale * gy;
            }
        }
    }
}

/// (1/N_φ)Σ ρ T_a T_b on one ring from the ring's Fourier coefficients.
fn angular_coupling(ma: i64, mb: i64, c: &[f64], s: &[f64]) -> f64 {
    let sk = |k: i64| {
        if k >= 0 {
            s[k as usize]
        } else {
            -s[(-k) as usize]
        }
    };
    let (a, b) = (ma.unsigned_abs() as usize, mb.unsigned_abs() as usize);
    match (ma.signum(), mb.signum()) {
        (0, 0) => c[0],
        (0, 1) => SQRT_2 * c[b],
        (0, -1) => SQRT_2 * s[b],
        (1, 0) => SQRT_2 * c[a],
        (-1, 0) => SQRT_2 * s[a],
        (1, 1) => c[a.abs_diff(b)] + c[a + b],
        (-1, -1) => c[a.abs_diff(b)] - c[a + b],
        (1, -1) => s[a + b] - sk(a as i64 - b as i64),
        (-1, 1) => s[a + b] - sk(b as i64 - a as i64),
        _ => unreachable!(),
    }
}

/// Builds the degree-L basis on a product rule and verifies its Gram matrix.
pub fn build_basis(l: usize, n_theta: usize, n_phi: usize) -> Result<SpectralBasis> {
    let need = 2 * l + 2;
    if n_theta < need {
        return Err(Error::Resolution(format!(
            "N_theta = {n_theta} per panel is below 2L+2 = {need}"
        )));
    }
    if n_phi < need {
        return Err(Error::Resolution(format!(
            "N_phi = {n_phi} is below 2L+2 = {need}"
        )));
    }
    let quadrature = QuadratureRule::new(n_theta, n_phi)?;
    let q_rings = quadrature
        .rings()
        .iter()
        .map(|&x| assoc_legendre(l, x))
        .collect();
    let basis = SpectralBasis {
        l_max: l,
        quadrature,
        q_rings,
        stiffness: OnceLock::new(),
    };
    let mut gram = basis.weighted_gram(|_| 1.0);
    for i in 0..gram.nrows() {
        gram[(i, i)] -= 1.0;
    }
    let dev = max_abs(&gram);
    if dev > 1e-10 {
        return Err(Error::Resolution(format!(
            "Gram matrix deviates from identity by {dev:e}"
        )));
    }
    Ok(basis)
}

/// Dirichlet form (i/2π)∫ ∂f/∂z̄ ∂g/∂z dz∧dz̄ in chart coordinates.
/// Computed once per basis and shared.
pub fn stiffness(basis: &SpectralBasis) -> Arc<DMatrix<f64>> {
    basis
        .stiffness
        .get_or_init(|| {
            let n = basis.dim();
            let n_rings = basis.quadrature.rings().len();
            let rows_per_ring = 2 * basis.quadrature.n_phi();
            let starts: Vec<usize> = (0..n_rings).step_by(RINGS_PER_CHUNK).collect();
            let partials: Vec<DMatrix<f64>> = starts
                .par_iter()
                .map(|&start| {
                    let end = (start + RINGS_PER_CHUNK).min(n_rings);
                    let mut a = DMatrix::zeros(rows_per_ring * (end - start), n);
                    for (i, ring) in (start..end).enumerate() {
                        basis.ring_gradient_rows(ring, &mut a, i * rows_per_ring);
                    }
                    let mut g = DMatrix::zeros(n, n);
                    add_gram(&mut g, &a);
                    g
                })
                .collect();
            let mut k = DMatrix::zeros(n, n);
            for p in &partials {
                k += p;
            }
            symmetrize(&mut k);
            Arc::new(k)
        })
        .clone()
}

/// M_ab = ∫ Y_a Y_b ω.
pub fn mass(basis: &SpectralBasis, metric: &ConformalMetric) -> Result<DMatrix<f64>> {
    for (p, _) in basis.quadrature.nodes() {
        let d = metric.density(p);
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidMetric {
                metric: metric.id().to_string(),
                reason: format!("density {d} at x = {}, phi = {}", p.x, p.phi),
            });
        }
    }
    Ok(basis.weighted_gram(|p| metric.density(p)))
}

/// The pencil (K, M) discretising Δ = −λ⁻¹∂²/∂z∂z̄.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub k: Arc<DMatrix<f64>>,
    pub m: DMatrix<f64>,
    pub metric_id: String,
}

impl OperatorPair {
    pub fn new(k: Arc<DMatrix<f64>>, m: DMatrix<f64>, metric_id: impl Into<String>) -> Result<Self> {
        if k.shape() != m.shape() || k.nrows() != k.ncols() {
            return Err(Error::Domain(format!(
                "pencil shapes differ: K {:?}, M {:?}",
                k.shape(),
                m.shape()
            )));
        }
        Ok(Self {
            k,
            m,
            metric_id: metric_id.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// (K, t·M): the pencil of the metric scaled by t.
    pub fn scaled(&self, t: f64) -> OperatorPair {
        OperatorPair {
            k: self.k.clone(),
            m: &self.m * t,
            metric_id: format!("scaled:{t}:{}", self.metric_id),
        }
    }

    pub fn volume(&self) -> f64 {
        self.m[(0, 0)]
    }
}

pub fn assemble(basis: &SpectralBasis, metric: &ConformalMetric) -> Result<OperatorPair> {
    OperatorPair::new(stiffness(basis), mass(basis, metric)?, metric.id())
}
