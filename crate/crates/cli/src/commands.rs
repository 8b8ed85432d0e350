use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use conformal_torsion::anomaly::{
    anomaly_constant, bott_chern_integral, calibrate_sign, quillen_log, two_route, QuillenData, SignCalibration,
};
use conformal_torsion::basis::{assemble, build_basis, SpectralBasis};
use conformal_torsion::eigen::{generalized_eigenvalues, Spectrum};
use conformal_torsion::harness::{
    delta_hat, frozen_bound, lambda1_floor, laplacian_variation_ratio, mass_ratio_constant, quillen_table,
    resolvent_convergence, resolvent_derivative_norm, richardson_limit, sweep, sweep_row, SweepRow,
};
use conformal_torsion::heat::{
    fit_asymptotics, geometric_grid, theta, truncation_bound, window_start, zeta, zeta_mellin, zeta_prime_zero,
    AsymptoticFit, HeatTraceSamples, ZetaPrimeZero, WINDOW_RTOL, WINDOW_SPAN,
};
use conformal_torsion::{sup_log_distance, ConformalMetric, QuadratureRule, SampleGrid};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cache::{CacheKey, SpectrumCache};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{num, opt_num, write_csv, write_json, Check, Summary};

/// Two-route tolerance: max(floor, factor × combined budget).
pub const TWO_ROUTE_FLOOR: f64 = 1e-3;
pub const TWO_ROUTE_FACTOR: f64 = 3.0;
pub const MELLIN_RTOL: f64 = 1e-4;
pub const LIMIT_ZETA_TOL: f64 = 5e-3;
pub const LIMIT_THETA_TOL: f64 = 1e-4;

type BasisKey = (usize, usize, usize);

pub struct Context {
    pub cfg: RunConfig,
    cache: Option<SpectrumCache>,
    bases: Mutex<HashMap<BasisKey, Arc<SpectralBasis>>>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Self {
        let cache = cfg.cache.enabled.then(|| SpectrumCache::new(cfg.cache_dir()));
        Self {
            cfg,
            cache,
            bases: Mutex::new(HashMap::new()),
        }
    }

    fn out(&self) -> &Path {
        &self.cfg.output.dir
    }

    fn l(&self) -> BasisKey {
        (self.cfg.discretization.l, self.cfg.n_theta(), self.cfg.n_phi())
    }

    fn basis(&self, key: BasisKey) -> Result<Arc<SpectralBasis>, CliError> {
        let mut map = self.bases.lock().expect("basis map poisoned");
        if let Some(b) = map.get(&key) {
            return Ok(b.clone());
        }
        let b = Arc::new(build_basis(key.0, key.1, key.2)?);
        map.insert(key, b.clone());
        Ok(b)
    }

    /// Eigenvalues for a metric, from the cache when possible.
    pub fn spectrum(&self, metric: &ConformalMetric, key: BasisKey) -> Result<Spectrum, CliError> {
        let ck = CacheKey {
            metric_id: metric.id().to_string(),
            l: key.0,
            n_theta: key.1,
            n_phi: key.2,
        };
        if let Some(s) = self.cache.as_ref().and_then(|c| c.load(&ck)) {
            return Ok(s);
        }
        let basis = self.basis(key)?;
        let solved = generalized_eigenvalues(&assemble(&basis, metric)?)?;
        // Rebuilt the way a cache hit is, so cold and warm runs agree bit for bit.
        let mut s = Spectrum::from_eigenvalues(solved.eigenvalues, ck.metric_id.clone(), solved.weyl_coefficient)?;
        s.basis_l = key.0;
        if let Some(c) = &self.cache {
            c.store(&ck, &s)?;
        }
        Ok(s)
    }

    fn fit(&self, spectrum: &Spectrum) -> Result<AsymptoticFit, CliError> {
        let f = &self.cfg.fit;
        let (lo, hi, user) = match f.window {
            Some([lo, hi]) => (lo, hi, true),
            None => {
                let lo = window_start(spectrum, WINDOW_RTOL)?;
                (lo, WINDOW_SPAN * lo, false)
            }
        };
        let grid = geometric_grid(lo, hi, f.nodes)?;
        let samples = HeatTraceSamples::from_spectrum(spectrum, &grid)?;
        fit_asymptotics(&samples, f.degree).map_err(|e| match e {
            conformal_torsion::Error::FitWindow { .. } if user => CliError::Validation(e.to_string()),
            e => e.into(),
        })
    }

    fn zeta_prime(&self, spectrum: &Spectrum) -> Result<(AsymptoticFit, ZetaPrimeZero), CliError> {
        let fit = self.fit(spectrum)?;
        let zp = zeta_prime_zero(spectrum, &fit)?;
        Ok((fit, zp))
    }

    fn anomaly_quadrature(&self) -> Result<QuadratureRule, CliError> {
        Ok(QuadratureRule::new(self.cfg.anomaly.quadrature_nodes, 4)?)
    }

    /// Sign calibration on (reference, calibration) at the configured degree.
    fn calibration(&self) -> Result<SignCalibration, CliError> {
        let a = &self.cfg.anomaly;
        let p = ConformalMetric::parse(&a.reference)?;
        let q = ConformalMetric::parse(&a.calibration)?;
        if p.id() == q.id() {
            return Err(CliError::Validation("anomaly.calibration must differ from anomaly.reference".into()));
        }
        let (_, zp) = self.zeta_prime(&self.spectrum(&p, self.l())?)?;
        let (_, zq) = self.zeta_prime(&self.spectrum(&q, self.l())?)?;
        Ok(calibrate_sign(&p, &zp, &q, &zq, &self.anomaly_quadrature()?)?)
    }
}

fn kernel_check(s: &Spectrum) -> Check {
    let ok = s.kernel_dim == 1
        && s.lambda1().is_ok_and(|l1| l1 > 0.0 && s.eigenvalues[0].abs() <= 1e-8 * l1);
    Check::new(
        "laplaceTX",
        ok,
        format!(
            "{}: kernel_dim {}, lambda_0 {:e}, lambda_1 {:e}",
            s.metric_id,
            s.kernel_dim,
            s.eigenvalues[0],
            s.nonzero().first().copied().unwrap_or(f64::NAN)
        ),
    )
}

pub fn spectrum_cmd(ctx: &Context) -> Result<(), CliError> {
    let metric = ctx.cfg.metric()?;
    let s = ctx.spectrum(&metric, ctx.l())?;
    let rows: Vec<Vec<String>> = s
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), num(*v)])
        .collect();
    write_csv(ctx.out(), "spectrum.csv", &["index", "eigenvalue"], &rows)?;
    Summary::new("spectrum", vec![kernel_check(&s)], None).finish(ctx.out())
}

fn theta_grid(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let t = &cfg.theta;
    if t.geometric {
        Ok(geometric_grid(t.lo, t.hi, t.count)?)
    } else {
        let h = (t.hi - t.lo) / (t.count - 1) as f64;
        Ok((0..t.count).map(|i| t.lo + h * i as f64).collect())
    }
}

pub fn theta_cmd(ctx: &Context) -> Result<(), CliError> {
    let metric = ctx.cfg.metric()?;
    let s = ctx.spectrum(&metric, ctx.l())?;
    let grid = theta_grid(&ctx.cfg)?;
    let mut rows = Vec::with_capacity(grid.len());
    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid {
        let v = theta(&s, t)?;
        values.push(v);
        rows.push(vec![num(t), num(v), num(truncation_bound(&s, t))]);
    }
    write_csv(ctx.out(), "theta.csv", &["t", "theta", "trunc_bound"], &rows)?;
    let decreasing = values.windows(2).all(|w| w[1] < w[0]) && values.iter().all(|&v| v > 0.0);
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let convex = grid.windows(3).zip(logs.windows(3)).all(|(t, l)| {
        let s1 = (l[1] - l[0]) / (t[1] - t[0]);
        let s2 = (l[2] - l[1]) / (t[2] - t[1]);
        s2 >= s1 - 1e-12 * s1.abs().max(1.0)
    });
    let checks = vec![Check::new(
        "theta_shape",
        decreasing && convex,
        format!("positive and decreasing: {decreasing}, log-convex: {convex}"),
    )];
    Summary::new("theta", checks, None).finish(ctx.out())
}

#[derive(Debug, Serialize)]
struct ZetaEntry {
    s: f64,
    value: f64,
    raw_sum: f64,
    tail_bound: f64,
    mellin: f64,
    mellin_budget: f64,
    relative_gap: f64,
    agree: bool,
}

#[derive(Debug, Serialize)]
struct ZetaReport {
    metric_id: String,
    l: usize,
    n_theta: usize,
    n_phi: usize,
    volume: f64,
    lambda1: f64,
    kernel_dim: usize,
    zeta0: f64,
    zeta0_full_trace: f64,
    zeta_prime0: f64,
    error_budget: f64,
    zeta_prime0_terms: ZetaPrimeZero,
    fit: AsymptoticFit,
    zeta: Vec<ZetaEntry>,
}

fn zeta_report(ctx: &Context, metric: &ConformalMetric) -> Result<(Spectrum, ZetaReport), CliError> {
    let (l, nt, np) = ctx.l();
    let s = ctx.spectrum(metric, (l, nt, np))?;
    let (fit, zp) = ctx.zeta_prime(&s)?;
    let mut entries = Vec::new();
    for &sv in &ctx.cfg.zeta.s {
        let d = zeta(&s, sv)?;
        let m = zeta_mellin(&s, &fit, sv)?;
        let gap = (d.value - m.value).abs();
        let rel = gap / d.value.abs();
        entries.push(ZetaEntry {
            s: sv,
            value: d.value,
            raw_sum: d.raw_sum,
            tail_bound: d.tail_bound,
            mellin: m.value,
            mellin_budget: m.error_budget,
            relative_gap: rel,
            agree: gap <= d.tail_bound + m.error_budget && rel <= MELLIN_RTOL,
        });
    }
    let report = ZetaReport {
        metric_id: metric.id().to_string(),
        l,
        n_theta: nt,
        n_phi: np,
        volume: s.weyl_coefficient,
        lambda1: s.lambda1()?,
        kernel_dim: s.kernel_dim,
        zeta0: fit.b_0,
        zeta0_full_trace: fit.b_0 + s.kernel_dim as f64,
        zeta_prime0: zp.value,
        error_budget: zp.error_budget,
        zeta_prime0_terms: zp,
        fit,
        zeta: entries,
    };
    Ok((s, report))
}

fn mellin_check(r: &ZetaReport) -> Check {
    let worst = r.zeta.iter().map(|z| z.relative_gap).fold(0.0, f64::max);
    Check::new(
        "key2",
        r.zeta.iter().all(|z| z.agree),
        format!("{}: Mellin vs eigenvalue sum, worst relative gap {worst:.3e}", r.metric_id),
    )
}

pub fn zeta_cmd(ctx: &Context) -> Result<(), CliError> {
    let (s, report) = zeta_report(ctx, &ctx.cfg.metric()?)?;
    write_json(ctx.out(), "zeta.json", &report)?;
    Summary::new("zeta", vec![kernel_check(&s), mellin_check(&report)], None).finish(ctx.out())
}

#[derive(Debug, Serialize)]
struct QuillenReport {
    calibration: SignCalibration,
    quillen: QuillenData,
}

pub fn torsion_cmd(ctx: &Context) -> Result<(), CliError> {
    let metric = ctx.cfg.metric()?;
    let (s, report) = zeta_report(ctx, &metric)?;
    let cal = ctx.calibration()?;
    let quad = ctx.anomaly_quadrature()?;
    let q = quillen_log(&metric, &quad, &report.zeta_prime0_terms, cal.sign)?;
    write_json(ctx.out(), "zeta.json", &report)?;
    write_json(
        ctx.out(),
        "quillen.json",
        &QuillenReport {
            calibration: cal,
            quillen: q,
        },
    )?;
    Summary::new("torsion", vec![kernel_check(&s), mellin_check(&report)], Some(cal.sign)).finish(ctx.out())
}

#[derive(Debug, Serialize)]
struct AnomalyRow {
    metric_id: String,
    direct: f64,
    anomaly: f64,
    gap: f64,
    budget: f64,
    tolerance: f64,
    pass: bool,
    sup_log_distance: f64,
    anomaly_constant: f64,
}

#[derive(Debug, Serialize)]
struct AnomalyReport {
    calibration: SignCalibration,
    reference: QuillenData,
    rows: Vec<AnomalyRow>,
}

pub fn anomaly_cmd(ctx: &Context) -> Result<(), CliError> {
    let a = &ctx.cfg.anomaly;
    let cal = ctx.calibration()?;
    let quad = ctx.anomaly_quadrature()?;
    let grid = SampleGrid::standard();
    let reference = ConformalMetric::parse(&a.reference)?;
    let (_, zr) = ctx.zeta_prime(&ctx.spectrum(&reference, ctx.l())?)?;
    let qr = quillen_log(&reference, &quad, &zr, cal.sign)?;
    let mut rows = Vec::new();
    let mut quillens = vec![qr.clone()];
    let mut bound_ok = true;
    for spec in &a.metrics {
        let m = ConformalMetric::parse(spec)?;
        let (_, zm) = ctx.zeta_prime(&ctx.spectrum(&m, ctx.l())?)?;
        let qm = quillen_log(&m, &quad, &zm, cal.sign)?;
        let c = two_route(&qr, &qm, &reference, &m, &quad)?;
        let k = anomaly_constant(&reference, &m, &quad)?;
        let dist = sup_log_distance(&reference, &m, &grid);
        bound_ok &= bott_chern_integral(&reference, &m, &quad)?.abs() <= k * dist;
        rows.push(AnomalyRow {
            metric_id: m.id().to_string(),
            direct: c.direct,
            anomaly: c.anomaly,
            gap: c.gap,
            budget: c.budget,
            tolerance: TWO_ROUTE_FLOOR.max(TWO_ROUTE_FACTOR * c.budget),
            pass: c.within(TWO_ROUTE_FLOOR, TWO_ROUTE_FACTOR),
            sup_log_distance: dist,
            anomaly_constant: k,
        });
        quillens.push(qm);
    }
    let worst = rows.iter().map(|r| r.gap / r.tolerance).fold(0.0, f64::max);
    let checks = vec![
        Check::new(
            "compare2methods",
            rows.iter().all(|r| r.pass),
            format!("{} pairs, worst gap/tolerance {worst:.3}", rows.len()),
        ),
        Check::new("convergenceAnomaly", bound_ok, "|I(p,q)| <= K sup|log(h_p/h_q)| for every pair"),
    ];
    write_json(
        ctx.out(),
        "anomaly.json",
        &AnomalyReport {
            calibration: cal,
            reference: qr,
            rows,
        },
    )?;
    write_json(ctx.out(), "quillen.json", &quillens)?;
    Summary::new("anomaly", checks, Some(cal.sign)).finish(ctx.out())
}

fn sweep_csv_row(r: &SweepRow, label: String) -> Vec<String> {
    let mut row = vec![label, r.metric_id.clone(), num(r.vol), num(r.lambda1)];
    row.extend(r.theta.iter().map(|v| num(*v)));
    row.extend([
        num(r.b_minus1),
        num(r.b_0),
        num(r.zeta_prime0),
        num(r.zeta_prime0_budget),
        num(r.log_quillen),
        opt_num(r.sup_log_dist_to_limit),
    ]);
    row
}

pub fn converge_cmd(ctx: &Context) -> Result<(), CliError> {
    let cfg = &ctx.cfg;
    let f = &cfg.family;
    let family = cfg.family()?;
    let cal = ctx.calibration()?;
    let sign = cal.sign;
    let grid = SampleGrid::standard();
    let quad = ctx.anomaly_quadrature()?;
    let basis = ctx.basis(ctx.l())?;
    let entries = sweep(&family, &f.parameters, &basis, &f.t_set, sign, &grid)?;
    let mut checks = Vec::new();
    let failures: Vec<String> = entries
        .iter()
        .filter_map(|e| e.error.as_ref().map(|m| format!("u = {}: {m}", e.parameter)))
        .collect();
    let rows: Vec<SweepRow> = entries.into_iter().filter_map(|e| e.row).collect();
    checks.push(Check::new("sweep", failures.is_empty(), failures.join("; ")));
    let limit_row = match family.limit() {
        Some(m) => Some(sweep_row(&basis, m, f64::INFINITY, &f.t_set, sign, None, &grid)?),
        None => None,
    };

    let mut header = vec!["parameter".to_string(), "metric_id".into(), "vol".into(), "lambda1".into()];
    header.extend(f.t_set.iter().map(|t| format!("theta_t{t}")));
    header.extend(
        ["b_minus1", "b_0", "zeta_prime0", "zeta_prime0_budget", "log_quillen", "sup_log_dist_to_limit"]
            .map(String::from),
    );
    let mut csv_rows: Vec<Vec<String>> = rows.iter().map(|r| sweep_csv_row(r, format!("{}", r.parameter))).collect();
    if let Some(r) = &limit_row {
        csv_rows.push(sweep_csv_row(r, "limit".into()));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(ctx.out(), "converge.csv", &header_refs, &csv_rows)?;

    // Kernel and positivity.
    let kernel_ok = rows.iter().chain(&limit_row).all(|r| r.kernel_dim == 1 && r.lambda1 > 0.0);
    checks.push(Check::new("laplaceTX", kernel_ok, format!("{} spectra with one-dimensional kernel", rows.len())));

    // Quillen table.
    let table = quillen_table(&family, &rows, sign, &quad, &grid)?;
    let qrows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.label.clone(),
                num(r.vol),
                num(r.zeta_prime0),
                num(r.log_quillen),
                opt_num(r.diff_to_prev),
                opt_num(r.bound),
            ]
        })
        .collect();
    write_csv(
        ctx.out(),
        "converge_quillen.csv",
        &["p", "vol", "zeta_prime0", "log_quillen", "diff_to_prev", "bound"],
        &qrows,
    )?;
    checks.push(Check::new(
        "convergenceAnomaly",
        table.is_cauchy(),
        format!("limit {:.10}, rows over bound: {:?}", table.limit, table.violations),
    ));

    // Two routes between consecutive members.
    let mut worst = 0.0f64;
    let mut two_ok = true;
    for w in rows.windows(2) {
        let (ma, mb) = (family.interpolate(w[0].parameter)?, family.interpolate(w[1].parameter)?);
        let c = two_route(&w[1].quillen(sign), &w[0].quillen(sign), &mb, &ma, &quad)?;
        two_ok &= c.within(TWO_ROUTE_FLOOR, TWO_ROUTE_FACTOR);
        worst = worst.max(c.gap / TWO_ROUTE_FLOOR.max(TWO_ROUTE_FACTOR * c.budget));
    }
    checks.push(Check::new(
        "compare2methods",
        two_ok,
        format!("consecutive members, worst gap/tolerance {worst:.3}"),
    ));

    // ζ′(0) and θ against the directly assembled limit.
    let zp: Vec<f64> = rows.iter().map(|r| r.zeta_prime0).collect();
    let diffs: Vec<f64> = zp.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let decreasing = diffs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let mut key2_ok = decreasing;
    let diff_text: Vec<String> = diffs.iter().map(|d| format!("{d:.3e}")).collect();
    let mut detail = format!("|zeta' differences| [{}]", diff_text.join(", "));
    if let (Some(lim), Some(last)) = (&limit_row, rows.last()) {
        let zgap = (last.zeta_prime0 - lim.zeta_prime0).abs();
        key2_ok &= zgap <= LIMIT_ZETA_TOL;
        detail += &format!("; |zeta'_last - zeta'_limit| {zgap:.3e}");
        let ti = f.t_set.iter().position(|&t| t == 1.0).unwrap_or(0);
        if rows.len() >= 3 {
            let tail = &rows[rows.len() - 3..];
            let ps: Vec<f64> = tail.iter().map(|r| r.parameter).collect();
            let th: Vec<f64> = tail.iter().map(|r| r.theta[ti]).collect();
            let rich = richardson_limit(&ps, &th, &[2.0, 3.0])?;
            let tgap = (rich - lim.theta[ti]).abs();
            key2_ok &= tgap <= LIMIT_THETA_TOL;
            detail += &format!(
                "; theta(t={}) extrapolated gap {tgap:.3e}, last-member gap {:.3e}",
                f.t_set[ti],
                (last.theta[ti] - lim.theta[ti]).abs()
            );
        }
    }
    checks.push(Check::new("key2", key2_ok, detail));

    // λ₁ floor against the limit metric (or the first member).
    let reference = family.limit().cloned().unwrap_or(family.interpolate(f.parameters[0])?);
    let ref_l1 = match &limit_row {
        Some(r) => r.lambda1,
        None => rows.first().map(|r| r.lambda1).unwrap_or(f64::NAN),
    };
    let pairs: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let m = family.interpolate(r.parameter)?;
            Ok((r.lambda1, mass_ratio_constant(&m, &reference, basis.quadrature(), &grid)))
        })
        .collect::<Result<_, CliError>>()?;
    if pairs.len() >= 2 {
        let floor = lambda1_floor(&pairs, ref_l1)?;
        checks.push(Check::new(
            "lowerbound",
            floor.pass,
            format!("kappa {:.6}, margin {:.3e}", floor.kappa, floor.margin),
        ));
    }

    // Operator convergence at the smaller degree.
    let rl = f.resolvent_l;
    let small = ctx.basis((rl, 2 * rl + 2, 2 * rl + 2))?;
    let metrics: Vec<ConformalMetric> = f
        .parameters
        .iter()
        .map(|&u| family.interpolate(u))
        .collect::<Result<_, _>>()?;
    if metrics.len() >= 2 {
        let rt = resolvent_convergence(&small, &metrics, family.limit(), &reference, 1.0, &grid)?;
        let mut dnorms = Vec::new();
        let mut dhats = Vec::new();
        let mut ratio = 0.0f64;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let dim = small.dim();
        let vectors: Vec<DVector<f64>> = (0..100)
            .map(|_| DVector::from_fn(dim, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        for &u in &f.variation_u {
            if family.interpolate(u).is_err() {
                continue;
            }
            ratio = ratio.max(laplacian_variation_ratio(&small, &family, u, &vectors, &grid)?);
            dnorms.push(resolvent_derivative_norm(&small, &family, u)?);
            dhats.push(delta_hat(&family, u, small.quadrature(), &grid)?);
        }
        checks.push(Check::new(
            "bornelapbelt",
            ratio <= 1.0 + 1e-10,
            format!("max |d_u Delta v| / (delta_hat |Delta v|) = {ratio:.4}"),
        ));
        let prop1 = if dnorms.is_empty() {
            None
        } else {
            Some(frozen_bound(&dnorms, &dhats, 2.0)?)
        };
        checks.push(Check::new(
            "deltacompact",
            rt.resolvent_bound.pass() && rt.monotone && prop1.as_ref().is_none_or(|b| b.pass()),
            format!(
                "resolvent constant {:.4}, violations {:?}; c3 {:.4}",
                rt.resolvent_bound.constant,
                rt.resolvent_bound.violations,
                prop1.as_ref().map_or(f64::NAN, |b| b.constant)
            ),
        ));
        checks.push(Check::new(
            "variationEu",
            rt.heat_bound.pass() && rt.monotone,
            format!(
                "heat-operator constant {:.4}, violations {:?}",
                rt.heat_bound.constant, rt.heat_bound.violations
            ),
        ));
        write_json(ctx.out(), "resolvent.json", &rt)?;
    }
    Summary::new("converge", checks, Some(sign)).finish(ctx.out())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_theta_grid() {
        let mut cfg = RunConfig::default();
        cfg.theta.geometric = false;
        cfg.theta.lo = 1.0;
        cfg.theta.hi = 2.0;
        cfg.theta.count = 3;
        assert_eq!(theta_grid(&cfg).unwrap(), vec![1.0, 1.5, 2.0]);
    }
}
