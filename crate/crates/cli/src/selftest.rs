//! Quick property checks at small degree.

use conformal_torsion::basis::{assemble, build_basis, stiffness};
use conformal_torsion::eigen::{generalized_eigenvalues, generalized_eigs};
use conformal_torsion::heat::{
    duhamel_residual, fit_spectrum, semigroup_defect, theta, zeta, zeta_mellin, FIT_DEGREE,
};
use conformal_torsion::operator::{equivalence_bounds, heat_trace_norm, lidskii_residual, InnerProduct};
use conformal_torsion::{ConformalMetric, MetricFamily};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::output::{Check, Summary};

const L: usize = 8;

fn run_checks() -> Result<Vec<Check>, CliError> {
    let n = 2 * L + 2;
    let basis = build_basis(L, n, n)?;
    let mut checks = Vec::new();

    let k = stiffness(&basis);
    let degrees = basis.degrees();
    let mut kerr = 0.0f64;
    for i in 0..k.nrows() {
        for j in 0..k.ncols() {
            let want = if i == j { (degrees[i] * (degrees[i] + 1)) as f64 } else { 0.0 };
            kerr = kerr.max((k[(i, j)] - want).abs());
        }
    }
    checks.push(Check::new("stiffness", kerr < 1e-9, format!("max |K - diag l(l+1)| = {kerr:.2e}")));

    let fs = ConformalMetric::parse("fs")?;
    let s = generalized_eigenvalues(&assemble(&basis, &fs)?)?;
    let mut ferr = 0.0f64;
    let mut idx = 0;
    for l in 0..=L {
        let want = (l * (l + 1)) as f64 / 2.0;
        for _ in 0..(2 * l + 1) {
            ferr = ferr.max((s.eigenvalues[idx] - want).abs());
            idx += 1;
        }
    }
    checks.push(Check::new("fs_spectrum", ferr < 1e-9, format!("max eigenvalue error {ferr:.2e}")));

    let mut kernel_ok = true;
    for spec in ["fs", "max", "pnorm:3", "smoothmax:0.1"] {
        let m = ConformalMetric::parse(spec)?;
        let sp = generalized_eigenvalues(&assemble(&basis, &m)?)?;
        kernel_ok &= sp.kernel_dim == 1 && sp.lambda1()? > 0.0;
    }
    checks.push(Check::new("laplaceTX", kernel_ok, "kernel is the constants for fs, max, pnorm:3, smoothmax:0.1"));

    let p3 = ConformalMetric::parse("pnorm:3")?;
    let a = generalized_eigenvalues(&assemble(&basis, &p3)?)?;
    let b = generalized_eigenvalues(&assemble(&basis, &p3.scaled(2.0)?)?)?;
    let serr = a
        .nonzero()
        .iter()
        .zip(b.nonzero())
        .map(|(x, y)| (y - x / 2.0).abs() / x)
        .fold(0.0, f64::max);
    checks.push(Check::new("scaling", serr < 1e-10, format!("max relative error {serr:.2e}")));

    let basis16 = build_basis(16, 34, 34)?;
    let s16 = generalized_eigenvalues(&assemble(&basis16, &fs)?)?;
    let fit = fit_spectrum(&s16, FIT_DEGREE)?;
    let mut mellin_ok = true;
    let mut worst = 0.0f64;
    for sv in [1.5, 2.0, 3.0] {
        let d = zeta(&s16, sv)?;
        let m = zeta_mellin(&s16, &fit, sv)?;
        let gap = (d.value - m.value).abs();
        worst = worst.max(gap / d.value.abs());
        mellin_ok &= gap <= d.tail_bound + m.error_budget;
    }
    checks.push(Check::new("mellin", mellin_ok, format!("worst relative gap {worst:.2e}")));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut op_ok = true;
    for _ in 0..10 {
        let dim = 6;
        let a = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let g1 = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let g2 = DMatrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        let id = DMatrix::<f64>::identity(dim, dim);
        let ip1 = InnerProduct::new(&g1 * g1.transpose() + &id)?;
        let ip2 = InnerProduct::new(&g2 * g2.transpose() + &id)?;
        op_ok &= lidskii_residual(&a, &ip1)? < 1e-9 * a.norm().max(1.0);
        op_ok &= equivalence_bounds(&a, &ip1, &ip2)?.holds();
    }
    let pair = assemble(&basis, &p3)?;
    let full = generalized_eigs(&pair)?;
    let bridge = (heat_trace_norm(&full, &pair.m, 0.5)? - theta(&full, 0.5)?).abs();
    op_ok &= bridge < 1e-10;
    checks.push(Check::new("operators", op_ok, format!("trace-norm bridge gap {bridge:.2e}")));

    let defect = semigroup_defect(&full, &pair.m, 0.3, 0.4)?;
    checks.push(Check::new("semigroup", defect < 1e-10, format!("max entry defect {defect:.2e}")));

    let family = MetricFamily::pnorm(4);
    let (u, h) = (2.5, 1e-2);
    let pairs = [u - h, u, u + h]
        .map(|v| family.interpolate(v).and_then(|m| assemble(&basis, &m)));
    let [pm, pc, pp] = pairs;
    let d = duhamel_residual(&pm?, &pc?, &pp?, h, 0.5, 16)?;
    let rel = d.residual / d.derivative_norm;
    checks.push(Check::new("duhamel", rel < 1e-3, format!("relative residual {rel:.2e}")));
    Ok(checks)
}

pub fn selftest_cmd(out: &std::path::Path) -> Result<(), CliError> {
    Summary::new("selftest", run_checks()?, None).finish(out)
}
