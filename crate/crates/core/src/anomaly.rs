//! Bott–Chern anomaly integrals and Quillen metrics on det H⁰(P¹, 𝒪).
//!
//! With the trivial metric on 𝒪, log h_Q = log vol + σ·ζ′(0), and the
//! anomaly formula predicts
//!
//! log h_Q(p) − log h_Q(q) = −I(p, q),
//! I(p, q) = −(1/12)∫ log(h_p/h_q)·(c₁(h_p) + c₁(h_q)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat::ZetaPrimeZero;
use crate::metric::{chern_c1_round, sup_log_distance, volume, ConformalMetric};
use crate::quadrature::{QuadratureRule, SampleGrid, SpherePoint};

/// Sign σ in log h_Q = log h_{L²} + σ·ζ′(0), as fixed by [`calibrate_sign`].
pub const SIGN_CONVENTION: i32 = 1;

fn c1_density(metric: &ConformalMetric, p: SpherePoint) -> Result<f64> {
    chern_c1_round(metric, p)
}

fn require_smooth(metric: &ConformalMetric) -> Result<()> {
    if metric.has_kink() {
        return Err(Error::UnsupportedMetric(metric.id().to_string()));
    }
    Ok(())
}

/// I(p, q) by quadrature.
pub fn bott_chern_integral(
    metric_p: &ConformalMetric,
    metric_q: &ConformalMetric,
    quadrature: &QuadratureRule,
) -> Result<f64> {
    require_smooth(metric_p)?;
    require_smooth(metric_q)?;
    if metric_p.id() == metric_q.id() {
        return Ok(0.0);
    }
    let v = quadrature.try_integrate(|x| {
        let log_ratio = (metric_p.density(x) / metric_q.density(x)).ln();
        Ok(log_ratio * (c1_density(metric_p, x)? + c1_density(metric_q, x)?))
    })?;
    Ok(-v / 12.0)
}

/// K = (1/12)∫(|c₁(h_p)| + |c₁(h_q)|), so that |I(p, q)| ≤ K·sup|log(h_p/h_q)|.
pub fn anomaly_constant(
    metric_p: &ConformalMetric,
    metric_q: &ConformalMetric,
    quadrature: &QuadratureRule,
) -> Result<f64> {
    require_smooth(metric_p)?;
    require_smooth(metric_q)?;
    let v = quadrature.try_integrate(|x| {
        Ok(c1_density(metric_p, x)?.abs() + c1_density(metric_q, x)?.abs())
    })?;
    Ok(v / 12.0)
}

/// log ‖1‖²_{L²} = log vol.
pub fn l2_metric_log(metric: &ConformalMetric, quadrature: &QuadratureRule) -> f64 {
    volume(metric, quadrature).ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuillenData {
    pub metric_id: String,
    pub vol: f64,
    pub log_l2: f64,
    pub zeta_prime0: f64,
    pub zeta_prime0_budget: f64,
    pub log_quillen: f64,
    pub sign_convention: i32,
}

pub fn quillen_log(
    metric: &ConformalMetric,
    quadrature: &QuadratureRule,
    zeta_prime0: &ZetaPrimeZero,
    sign: i32,
) -> Result<QuillenData> {
    if sign != 1 && sign != -1 {
        return Err(Error::Domain(format!("sign convention must be ±1, got {sign}")));
    }
    let vol = volume(metric, quadrature);
    let log_l2 = vol.ln();
    Ok(QuillenData {
        metric_id: metric.id().to_string(),
        vol,
        log_l2,
        zeta_prime0: zeta_prime0.value,
        zeta_prime0_budget: zeta_prime0.error_budget,
        log_quillen: log_l2 + sign as f64 * zeta_prime0.value,
        sign_convention: sign,
    })
}

/// Both routes for log h_Q(p) − log h_Q(q).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoRouteCheck {
    pub direct: f64,
    pub anomaly: f64,
    pub gap: f64,
    pub budget: f64,
}

impl TwoRouteCheck {
    pub fn within(&self, floor: f64, factor: f64) -> bool {
        self.gap <= floor.max(factor * self.budget)
    }
}

pub fn two_route(
    p: &QuillenData,
    q: &QuillenData,
    metric_p: &ConformalMetric,
    metric_q: &ConformalMetric,
    quadrature: &QuadratureRule,
) -> Result<TwoRouteCheck> {
    let anomaly = -bott_chern_integral(metric_p, metric_q, quadrature)?;
    let direct = p.log_quillen - q.log_quillen;
    Ok(TwoRouteCheck {
        direct,
        anomaly,
        gap: (direct - anomaly).abs(),
        budget: p.zeta_prime0_budget + q.zeta_prime0_budget,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignCalibration {
    pub sign: i32,
    pub gap_plus: f64,
    pub gap_minus: f64,
}

/// Picks σ ∈ {+1, −1} so that the two-route equality holds on one pair.
pub fn calibrate_sign(
    metric_p: &ConformalMetric,
    zeta_p: &ZetaPrimeZero,
    metric_q: &ConformalMetric,
    zeta_q: &ZetaPrimeZero,
    quadrature: &QuadratureRule,
) -> Result<SignCalibration> {
    let gap = |sign: i32| -> Result<f64> {
        let a = quillen_log(metric_p, quadrature, zeta_p, sign)?;
        let b = quillen_log(metric_q, quadrature, zeta_q, sign)?;
        Ok(two_route(&a, &b, metric_p, metric_q, quadrature)?.gap)
    };
    let gap_plus = gap(1)?;
    let gap_minus = gap(-1)?;
    let budget = zeta_p.error_budget + zeta_q.error_budget;
    let (sign, best, worst) = if gap_plus <= gap_minus {
        (1, gap_plus, gap_minus)
    } else {
        (-1, gap_minus, gap_plus)
    };
    if worst <= best.max(budget) * 3.0 {
        return Err(Error::Spectrum(format!(
            "sign calibration is ambiguous: gaps {gap_plus:e} (+1) and {gap_minus:e} (-1)"
        )));
    }
    Ok(SignCalibration {
        sign,
        gap_plus,
        gap_minus,
    })
}

/// One row of a Quillen convergence table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuillenRow {
    pub label: String,
    pub vol: f64,
    pub zeta_prime0: f64,
    pub log_quillen: f64,
    pub diff_to_prev: Option<f64>,
    /// K·sup|log(h_n/h_{n−1})| plus the two ζ′(0) budgets.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuillenLimit {
    pub rows: Vec<QuillenRow>,
    pub limit: f64,
    /// Rows whose difference exceeds its bound.
    pub violations: Vec<usize>,
}

impl QuillenLimit {
    pub fn is_cauchy(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Aitken extrapolation of the last three terms; falls back to the last
/// value when the differences are not geometrically decreasing.
pub fn aitken_limit(values: &[f64]) -> f64 {
    let n = values.len();
    let Some(&last) = values.last() else {
        return f64::NAN;
    };
    if n < 3 {
        return last;
    }
    let d1 = values[n - 2] - values[n - 3];
    let d2 = last - values[n - 2];
    let denom = d2 - d1;
    if d1 == 0.0 || denom == 0.0 || d2 / d1 <= 0.0 || d2.abs() >= d1.abs() {
        return last;
    }
    last - d2 * d2 / denom
}

/// Convergence table of log h_Q along a sequence of smooth metrics.
pub fn quillen_limit(
    members: &[(ConformalMetric, QuillenData)],
    label: impl Fn(usize) -> String,
    quadrature: &QuadratureRule,
    grid: &SampleGrid,
) -> Result<QuillenLimit> {
    if members.is_empty() {
        return Err(Error::Domain("quillen_limit needs at least one member".into()));
    }
    let mut rows = Vec::with_capacity(members.len());
    let mut violations = Vec::new();
    for (i, (metric, data)) in members.iter().enumerate() {
        let (diff, bound) = if i == 0 {
            (None, None)
        } else {
            let (prev_metric, prev) = &members[i - 1];
            let k = anomaly_constant(metric, prev_metric, quadrature)?;
            let dist = sup_log_distance(metric, prev_metric, grid);
            let bound = k * dist + data.zeta_prime0_budget + prev.zeta_prime0_budget;
            let diff = data.log_quillen - prev.log_quillen;
            if diff.abs() > bound {
                violations.push(i);
            }
            (Some(diff), Some(bound))
        };
        rows.push(QuillenRow {
            label: label(i),
            vol: data.vol,
            zeta_prime0: data.zeta_prime0,
            log_quillen: data.log_quillen,
            diff_to_prev: diff,
            bound,
        });
    }
    let values: Vec<f64> = rows.iter().map(|r| r.log_quillen).collect();
    Ok(QuillenLimit {
        limit: aitken_limit(&values),
        rows,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{fs_metric, max_metric, pnorm_metric};

    fn quad() -> QuadratureRule {
        QuadratureRule::new(200, 4).unwrap()
    }

    #[test]
    fn identical_metrics_give_zero() {
        let q = quad();
        let p3 = pnorm_metric(3).unwrap();
        assert_eq!(bott_chern_integral(&p3, &p3, &q).unwrap(), 0.0);
    }

    #[test]
    fn antisymmetric_and_bounded() {
        let q = quad();
        let a = pnorm_metric(2).unwrap();
        let b = pnorm_metric(5).unwrap();
        let i_ab = bott_chern_integral(&a, &b, &q).unwrap();
        let i_ba = bott_chern_integral(&b, &a, &q).unwrap();
        assert!((i_ab + i_ba).abs() < 1e-12);
        let k = anomaly_constant(&a, &b, &q).unwrap();
        let d = sup_log_distance(&a, &b, &SampleGrid::standard());
        assert!(i_ab.abs() <= k * d);
    }

    #[test]
    fn scaling_slope() {
        let q = quad();
        let fs = fs_metric();
        for t in [0.5f64, 2.0, 10.0] {
            let i = bott_chern_integral(&fs.scaled(t).unwrap(), &fs, &q).unwrap();
            assert!((i + t.ln() / 3.0).abs() < 1e-12, "{t}: {i}");
        }
        assert!((l2_metric_log(&fs, &q) - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_c1_is_rejected() {
        let q = quad();
        assert!(matches!(
            bott_chern_integral(&max_metric(), &fs_metric(), &q),
            Err(Error::UnsupportedMetric(_))
        ));
    }

    #[test]
    fn aitken_on_geometric_sequence() {
        let v: Vec<f64> = (0..4).map(|k| 1.0 + 0.25f64.powi(k)).collect();
        assert!((aitken_limit(&v) - 1.0).abs() < 1e-14);
        assert_eq!(aitken_limit(&[1.0, 2.0]), 2.0);
    }
}
