//! Conformal metrics on P¹ in the two-chart atlas, the smoothing families
//! that approximate the singular max metric, and the interpolation H(u).
//!
//! Every metric is stored as a density ρ against the normalised round
//! measure μ, so ω = ρ·μ and the chart factor is λ(z) = ρ/(1+|z|²)².
//! All built-in profiles depend on x = cos θ only and are even in x.

use std::fmt;
use std::sync::Arc;

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::quadrature::{QuadratureRule, SampleGrid, SpherePoint};
use crate::special::SmoothStep;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// z = x₀/x₁, z = 0 at the north pole.
    North,
    /// w = x₁/x₀ = 1/z.
    South,
}

impl Chart {
    pub fn index(self) -> usize {
        match self {
            Chart::North => 0,
            Chart::South => 1,
        }
    }

    pub fn other(self) -> Chart {
        match self {
            Chart::North => Chart::South,
            Chart::South => Chart::North,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub z: Complex<f64>,
}

impl ChartPoint {
    pub fn new(chart: Chart, z: Complex<f64>) -> Self {
        Self { chart, z }
    }

    pub fn north(re: f64, im: f64) -> Self {
        Self::new(Chart::North, Complex::new(re, im))
    }

    pub fn south(re: f64, im: f64) -> Self {
        Self::new(Chart::South, Complex::new(re, im))
    }

    /// The same point in the other chart. Fails at the chart's origin.
    pub fn swap_chart(&self) -> Result<ChartPoint> {
        if self.z.norm_sqr() == 0.0 {
            return Err(Error::Domain(
                "the origin of a chart is not in the overlap".into(),
            ));
        }
        Ok(ChartPoint::new(self.chart.other(), self.z.inv()))
    }

    pub fn to_sphere(&self) -> SpherePoint {
        let s = self.z.norm_sqr();
        let x = (1.0 - s) / (1.0 + s);
        match self.chart {
            Chart::North => SpherePoint::new(x, self.z.arg()),
            Chart::South => SpherePoint::new(-x, -self.z.arg()),
        }
    }

    pub fn from_sphere(p: SpherePoint, chart: Chart) -> ChartPoint {
        let (num, den, phi) = match chart {
            Chart::North => (1.0 - p.x, 1.0 + p.x, p.phi),
            Chart::South => (1.0 + p.x, 1.0 - p.x, -p.phi),
        };
        let r = (num / den).sqrt();
        ChartPoint::new(chart, Complex::from_polar(r, phi))
    }

    /// The chart in which |z| ≤ 1 at this sphere point.
    pub fn preferred(p: SpherePoint) -> ChartPoint {
        let chart = if p.x >= 0.0 { Chart::North } else { Chart::South };
        Self::from_sphere(p, chart)
    }
}

impl fmt::Display for ChartPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "chart {} at ({}, {})",
            self.chart.index(),
            self.z.re,
            self.z.im
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Smoothness {
    Smooth,
    Continuous,
    SingularIntegrable,
}

#[derive(Debug, Clone, PartialEq)]
enum Profile {
    FubiniStudy,
    Max,
    PNorm(u32),
    SmoothMax(f64),
    Scaled(f64, Arc<Profile>),
    Blend {
        lower: Arc<Profile>,
        upper: Arc<Profile>,
        weight: f64,
    },
}

impl Profile {
    fn density(&self, x: f64) -> f64 {
        match self {
            Profile::FubiniStudy => 2.0,
            Profile::Max => {
                let d = 1.0 + x.abs();
                4.0 / (d * d)
            }
            Profile::PNorm(p) => {
                let a = x.abs();
                let r = (1.0 - a) / (1.0 + a);
                let p = *p as f64;
                4.0 / ((1.0 + a) * (1.0 + a)) * (-(2.0 / p) * r.powf(p).ln_1p()).exp()
            }
            Profile::SmoothMax(eps) => {
                let d = 1.0 + x.hypot(*eps);
                4.0 / (d * d)
            }
            Profile::Scaled(t, inner) => t * inner.density(x),
            Profile::Blend {
                lower,
                upper,
                weight,
            } => (1.0 - weight) * lower.density(x) + weight * upper.density(x),
        }
    }

    /// Chart factor as a function of s = |z|²; identical formula in both
    /// charts because every profile is even in x.
    fn factor(&self, s: f64) -> f64 {
        match self {
            Profile::FubiniStudy => 2.0 / ((1.0 + s) * (1.0 + s)),
            Profile::Max => 1.0 / (s.max(1.0) * s.max(1.0)),
            Profile::PNorm(p) => {
                let p = *p as f64;
                if s <= 1.0 {
                    (-(2.0 / p) * s.powf(p).ln_1p()).exp()
                } else {
                    (-(2.0 / p) * s.powf(-p).ln_1p()).exp() / (s * s)
                }
            }
            Profile::SmoothMax(_) => {
                let x = (1.0 - s) / (1.0 + s);
                self.density(x) / ((1.0 + s) * (1.0 + s))
            }
            Profile::Scaled(t, inner) => t * inner.factor(s),
            Profile::Blend {
                lower,
                upper,
                weight,
            } => (1.0 - weight) * lower.factor(s) + weight * upper.factor(s),
        }
    }

    /// (ln ρ, (ln ρ)′, (ln ρ)″) in x, when available in closed form.
    fn log_jet(&self, x: f64) -> Option<[f64; 3]> {
        match self {
            Profile::FubiniStudy => Some([2f64.ln(), 0.0, 0.0]),
            Profile::Max | Profile::Blend { .. } => None,
            Profile::PNorm(p) => {
                let pf = *p as f64;
                let a = x.abs();
                let sign = if x < 0.0 { -1.0 } else { 1.0 };
                let r = (1.0 - a) / (1.0 + a);
                let rp = r.powf(pf);
                // B/A and B′/A for A = (1+a)^p + (1−a)^p, normalised by (1+a)^p.
                let ba = (1.0 - r.powf(pf - 1.0)) / ((1.0 + a) * (1.0 + rp));
                let bpa = (pf - 1.0) * (1.0 + r.powf(pf - 2.0))
                    / ((1.0 + a) * (1.0 + a) * (1.0 + rp));
                let d1 = -2.0 * ba;
                let d2 = -2.0 * (bpa - pf * ba * ba);
                Some([self.density(x).ln(), sign * d1, d2])
            }
            Profile::SmoothMax(eps) => {
                let q = x.hypot(*eps);
                let q1 = x / q;
                let q2 = eps * eps / (q * q * q);
                let d1 = -2.0 * q1 / (1.0 + q);
                let d2 = -2.0 * (q2 / (1.0 + q) - q1 * q1 / ((1.0 + q) * (1.0 + q)));
                Some([self.density(x).ln(), d1, d2])
            }
            Profile::Scaled(t, inner) => inner.log_jet(x).map(|j| [j[0] + t.ln(), j[1], j[2]]),
        }
    }

    fn has_kink(&self) -> bool {
        match self {
            Profile::Max => true,
            Profile::Scaled(_, inner) => inner.has_kink(),
            Profile::Blend { lower, upper, .. } => lower.has_kink() || upper.has_kink(),
            _ => false,
        }
    }

    fn smoothness(&self) -> Smoothness {
        match self {
            Profile::Max => Smoothness::SingularIntegrable,
            Profile::Scaled(_, inner) => inner.smoothness(),
            Profile::Blend { lower, upper, .. } => lower.smoothness().max(upper.smoothness()),
            _ => Smoothness::Smooth,
        }
    }
}

/// A conformal metric on P¹ with its smoothness class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMetric {
    id: String,
    profile: Arc<Profile>,
}

impl ConformalMetric {
    fn from_profile(id: String, profile: Profile) -> Self {
        Self {
            id,
            profile: Arc::new(profile),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn smoothness(&self) -> Smoothness {
        self.profile.smoothness()
    }

    /// Whether the metric carries a kink along the equator |z| = 1.
    pub fn has_kink(&self) -> bool {
        self.profile.has_kink()
    }

    pub fn has_analytic_c1(&self) -> bool {
        self.profile.log_jet(0.5).is_some()
    }

    /// Density of ω against the normalised round measure.
    pub fn density(&self, p: SpherePoint) -> f64 {
        self.profile.density(p.x)
    }

    /// λ(z) = h(∂/∂z, ∂/∂z) in the point's chart.
    pub fn factor(&self, p: &ChartPoint) -> f64 {
        self.profile.factor(p.z.norm_sqr())
    }

    /// Analytic c₁ density against (i/2π)dz∧dz̄, if the profile has one.
    pub fn analytic_c1(&self, p: &ChartPoint) -> Option<f64> {
        let s = p.z.norm_sqr();
        self.c1_mu_analytic(p.to_sphere())
            .map(|k| k / ((1.0 + s) * (1.0 + s)))
    }

    /// c₁ density against μ from the closed-form jet of ln ρ:
    /// κ = 2 + 2x(ln ρ)′ − (1−x²)(ln ρ)″.
    fn c1_mu_analytic(&self, p: SpherePoint) -> Option<f64> {
        self.profile
            .log_jet(p.x)
            .map(|[_, d1, d2]| 2.0 + 2.0 * p.x * d1 - (1.0 - p.x * p.x) * d2)
    }

    /// t·h.
    pub fn scaled(&self, t: f64) -> Result<ConformalMetric> {
        if !(t.is_finite() && t > 0.0) {
            return Err(Error::InvalidMetric {
                metric: self.id.clone(),
                reason: format!("scale factor must be positive and finite, got {t}"),
            });
        }
        Ok(Self::from_profile(
            format!("scaled:{t}:{}", self.id),
            Profile::Scaled(t, self.profile.clone()),
        ))
    }

    /// Parse a metric specification string.
    ///
    /// Grammar: `fs`, `max`, `pnorm:<p>`, `smoothmax:<eps>`,
    /// `scaled:<t>:<inner>`, `interp:<u>:<family>`.
    pub fn parse(spec: &str) -> Result<ConformalMetric> {
        let err = |reason: &str| Error::Parse {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let spec = spec.trim();
        let (head, rest) = match spec.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (spec, None),
        };
        match (head, rest) {
            ("fs", None) => Ok(fs_metric()),
            ("max", None) => Ok(max_metric()),
            ("pnorm", Some(p)) => {
                let p: u32 = p.parse().map_err(|_| err("p must be a positive integer"))?;
                pnorm_metric(p)
            }
            ("smoothmax", Some(e)) => {
                let eps: f64 = e.parse().map_err(|_| err("eps must be a number"))?;
                smoothmax_metric(eps)
            }
            ("scaled", Some(r)) => {
                let (t, inner) = r
                    .split_once(':')
                    .ok_or_else(|| err("expected scaled:<t>:<inner>"))?;
                let t: f64 = t.parse().map_err(|_| err("t must be a number"))?;
                ConformalMetric::parse(inner)?.scaled(t)
            }
            ("interp", Some(r)) => {
                let (u, fam) = r
                    .split_once(':')
                    .ok_or_else(|| err("expected interp:<u>:<family>"))?;
                let u: f64 = u.parse().map_err(|_| err("u must be a number"))?;
                if !(u.is_finite() && u >= 1.0) {
                    return Err(Error::Domain(format!("interpolation needs u >= 1, got {u}")));
                }
                let family = MetricFamily::parse(fam, u.ceil() as usize + 1)?;
                family.interpolate(u)
            }
            _ => Err(err("unknown metric kind")),
        }
    }
}

impl fmt::Display for ConformalMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id)
    }
}

/// λ₀(z) = 2/(1+|z|²)², volume 2.
pub fn fs_metric() -> ConformalMetric {
    ConformalMetric::from_profile("fs".into(), Profile::FubiniStudy)
}

/// λ₀(z) = 1/max(1, |z|)⁴, kinked along |z| = 1.
pub fn max_metric() -> ConformalMetric {
    ConformalMetric::from_profile("max".into(), Profile::Max)
}

/// λ₀(z) = (1 + |z|^{2p})^{−2/p}; converges uniformly to the max metric.
pub fn pnorm_metric(p: u32) -> Result<ConformalMetric> {
    if p == 0 {
        return Err(Error::InvalidMetric {
            metric: "pnorm:0".into(),
            reason: "p must be at least 1".into(),
        });
    }
    Ok(ConformalMetric::from_profile(
        format!("pnorm:{p}"),
        Profile::PNorm(p),
    ))
}

/// A second smoothing of the max metric: ρ = 4/(1 + √(x² + ε²))².
/// Its sup-log distance to the max metric is 2·ln(1 + ε).
pub fn smoothmax_metric(eps: f64) -> Result<ConformalMetric> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidMetric {
            metric: format!("smoothmax:{eps}"),
            reason: "eps must be positive and finite".into(),
        });
    }
    Ok(ConformalMetric::from_profile(
        format!("smoothmax:{eps}"),
        Profile::SmoothMax(eps),
    ))
}

/// Density of c₁(TX, h) against (i/2π)dz∧dz̄ at `point`.
///
/// Uses the closed form when available, else a fourth-order centred
/// difference of −ln λ with step max(1e−4, 1e−3(1+|z|)).
pub fn chern_c1(metric: &ConformalMetric, point: &ChartPoint) -> Result<f64> {
    if let Some(v) = metric.analytic_c1(point) {
        return Ok(v);
    }
    let r = point.z.norm();
    let h = f64::max(1e-4, 1e-3 * (1.0 + r));
    if metric.has_kink() && (r - 1.0).abs() <= 2.0 * h * (1.0 + 1e-12) {
        return Err(Error::UnsupportedPoint {
            metric: metric.id.clone(),
            point: point.to_string(),
            reason: "finite-difference stencil crosses the kink circle |z| = 1".into(),
        });
    }
    let g = |dx: f64, dy: f64| {
        let q = ChartPoint::new(point.chart, point.z + Complex::new(dx, dy));
        -metric.factor(&q).ln()
    };
    let c = g(0.0, 0.0);
    let d2 = |f1: f64, f2: f64, m1: f64, m2: f64| {
        (-f2 + 16.0 * f1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h)
    };
    let dxx = d2(g(h, 0.0), g(2.0 * h, 0.0), g(-h, 0.0), g(-2.0 * h, 0.0));
    let dyy = d2(g(0.0, h), g(0.0, 2.0 * h), g(0.0, -h), g(0.0, -2.0 * h));
    Ok(0.25 * (dxx + dyy))
}

/// c₁ density against the normalised round measure μ at a sphere point,
/// evaluated in the chart where |z| ≤ 1.
pub fn chern_c1_round(metric: &ConformalMetric, p: SpherePoint) -> Result<f64> {
    if let Some(v) = metric.c1_mu_analytic(p) {
        return Ok(v);
    }
    let cp = ChartPoint::preferred(p);
    let s = cp.z.norm_sqr();
    Ok(chern_c1(metric, &cp)? * (1.0 + s) * (1.0 + s))
}

/// ∫ ω over P¹.
pub fn volume(metric: &ConformalMetric, quadrature: &QuadratureRule) -> f64 {
    quadrature.integrate(|p| metric.density(p))
}

/// ∫ ω computed from the chart factor in the given chart's coordinates.
pub fn volume_in_chart(metric: &ConformalMetric, quadrature: &QuadratureRule, chart: Chart) -> f64 {
    quadrature.integrate(|p| {
        let cp = ChartPoint::from_sphere(p, chart);
        let s = cp.z.norm_sqr();
        metric.factor(&cp) * (1.0 + s) * (1.0 + s)
    })
}

/// sup over the grid of |ln(h_a/h_b)|.
pub fn sup_log_distance(a: &ConformalMetric, b: &ConformalMetric, grid: &SampleGrid) -> f64 {
    grid.points()
        .iter()
        .map(|&p| (a.density(p) / b.density(p)).ln().abs())
        .fold(0.0, f64::max)
}

/// The value of δ_X(u) on a grid together with its a-priori bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaX {
    pub value: f64,
    pub bound: f64,
}

/// A discrete metric sequence h_n with the smooth interpolation H(u).
#[derive(Debug, Clone, PartialEq)]
pub struct MetricFamily {
    name: String,
    members: Vec<ConformalMetric>,
    bump: SmoothStep,
    limit: Option<ConformalMetric>,
}

impl MetricFamily {
    pub fn new(
        name: impl Into<String>,
        members: Vec<ConformalMetric>,
        limit: Option<ConformalMetric>,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Domain("a metric family needs at least one member".into()));
        }
        Ok(Self {
            name: name.into(),
            members,
            bump: SmoothStep,
            limit,
        })
    }

    /// members[n] = pnorm(max(n, 1)) for n < count, limit = max.
    pub fn pnorm(count: usize) -> Self {
        let members = (0..count.max(1))
            .map(|n| pnorm_metric(n.max(1) as u32).expect("p >= 1"))
            .collect();
        Self::new("pnorm", members, Some(max_metric())).expect("non-empty")
    }

    /// members[n] = smoothmax(1/max(n, 1)) for n < count, limit = max.
    pub fn smoothmax(count: usize) -> Self {
        let members = (0..count.max(1))
            .map(|n| smoothmax_metric(1.0 / n.max(1) as f64).expect("eps > 0"))
            .collect();
        Self::new("smoothmax", members, Some(max_metric())).expect("non-empty")
    }

    /// Every member equal to `metric`; the limit is the metric itself.
    pub fn constant(metric: ConformalMetric, count: usize) -> Self {
        let name = format!("const:{}", metric.id());
        let members = vec![metric.clone(); count.max(1)];
        Self::new(name, members, Some(metric)).expect("non-empty")
    }

    /// `pnorm`, `smoothmax` or `const:<metric>` with `count` members.
    pub fn parse(spec: &str, count: usize) -> Result<Self> {
        match spec.trim() {
            "pnorm" => Ok(Self::pnorm(count)),
            "smoothmax" => Ok(Self::smoothmax(count)),
            s => match s.strip_prefix("const:") {
                Some(inner) => Ok(Self::constant(ConformalMetric::parse(inner)?, count)),
                None => Err(Error::Parse {
                    spec: spec.to_string(),
                    reason: "unknown family (expected pnorm, smoothmax or const:<metric>)".into(),
                }),
            },
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn members(&self) -> &[ConformalMetric] {
        &self.members
    }

    pub fn member(&self, n: usize) -> Result<&ConformalMetric> {
        self.members.get(n).ok_or_else(|| {
            Error::Domain(format!(
                "family `{}` has {} members, index {n} requested",
                self.name,
                self.members.len()
            ))
        })
    }

    pub fn limit(&self) -> Option<&ConformalMetric> {
        self.limit.as_ref()
    }

    pub fn bump(&self) -> SmoothStep {
        self.bump
    }

    /// Interval index k with u ∈ (k−1, k] and the local coordinate u − (k−1).
    pub(crate) fn locate(&self, u: f64) -> Result<(usize, f64)> {
        if !(u.is_finite() && u >= 1.0) {
            return Err(Error::Domain(format!("interpolation needs u >= 1, got {u}")));
        }
        let k = u.ceil() as usize;
        if self.members.len() < k + 1 {
            return Err(Error::Domain(format!(
                "family `{}` has {} members; u = {u} needs {}",
                self.name,
                self.members.len(),
                k + 1
            )));
        }
        Ok((k, u - (k - 1) as f64))
    }

    /// H(u) = (1−ρ(u−k+1))·h_{k−1} + ρ(u−k+1)·h_k for u ∈ [k−1, k].
    pub fn interpolate(&self, u: f64) -> Result<ConformalMetric> {
        let (k, frac) = self.locate(u)?;
        if frac == 1.0 {
            return Ok(self.members[k].clone());
        }
        let weight = self.bump.value(frac);
        let lower = &self.members[k - 1];
        let upper = &self.members[k];
        Ok(ConformalMetric::from_profile(
            format!("interp:{u}:{}", self.name),
            Profile::Blend {
                lower: lower.profile.clone(),
                upper: upper.profile.clone(),
                weight,
            },
        ))
    }

    /// ∂_u of the density of H(u) at a point.
    pub fn density_derivative(&self, u: f64, p: SpherePoint) -> Result<f64> {
        let (k, frac) = self.locate(u)?;
        let d = self.bump.derivative(frac);
        Ok(d * (self.members[k].density(p) - self.members[k - 1].density(p)))
    }

    /// ∂_u ln H(u)⁻¹ at a point.
    pub fn log_inverse_derivative(&self, u: f64, p: SpherePoint) -> Result<f64> {
        let (k, frac) = self.locate(u)?;
        let d = self.bump.derivative(frac);
        if d == 0.0 {
            return Ok(0.0);
        }
        let lo = self.members[k - 1].density(p);
        let hi = self.members[k].density(p);
        let w = self.bump.value(frac);
        let h = (1.0 - w) * lo + w * hi;
        Ok(d * (lo - hi) / h)
    }

    /// δ_X(u) = sup over the grid of |∂_u ln H(u)⁻¹|, with the bound
    /// c·sup|(h_{[u]} − h_{[u]+1})/h_{[u]+1}|, c = sup|ρ′|·exp(sup ln(h_{[u]+1}/h_{[u]})).
    pub fn delta_x(&self, u: f64, grid: &SampleGrid) -> Result<DeltaX> {
        if grid.is_empty() {
            return Err(Error::Domain("delta_X needs a non-empty sample grid".into()));
        }
        let (k, _) = self.locate(u)?;
        let lo = &self.members[k - 1];
        let hi = &self.members[k];
        let mut value = 0.0f64;
        let mut rel = 0.0f64;
        let mut ratio = 0.0f64;
        for &p in grid.points() {
            value = value.max(self.log_inverse_derivative(u, p)?.abs());
            let (a, b) = (lo.density(p), hi.density(p));
            rel = rel.max(((a - b) / b).abs());
            ratio = ratio.max((b / a).ln());
        }
        let c = self.bump.derivative_bound() * ratio.max(0.0).exp();
        Ok(DeltaX {
            value,
            bound: c * rel,
        })
    }
}
