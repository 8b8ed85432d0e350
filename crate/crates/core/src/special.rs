//! Scalar special functions and quadrature primitives shared by the spectral
//! pipeline: Gauss–Legendre nodes, the exponential integral E₁, the flat
//! smooth step used by metric interpolation, and deterministic summation.

use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

/// Exponential integral E₁(x) = ∫₁^∞ e^{−xt}/t dt for x > 0.
///
/// Power series below 1, modified Lentz continued fraction above; absolute
/// accuracy is better than 1e-14 on (0, ∞).
pub fn exp_e1(x: f64) -> f64 {
    assert!(x > 0.0, "E1 is only defined here for x > 0, got {x}");
    if x < 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        let mut k = 1.0;
        loop {
            term *= -x / k;
            let contrib = -term / k;
            sum += contrib;
            if contrib.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
            k += 1.0;
            if k > 200.0 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() + sum
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

/// The flat smooth step ρ₁(x) = f(x) / (f(x) + f(1−x)) with f(x) = exp(−1/x).
///
/// All derivatives vanish at 0 and 1, so interpolated metric families are
/// stationary at integer parameters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SmoothStep;

impl SmoothStep {
    fn f(x: f64) -> f64 {
        if x > 0.0 {
            (-1.0 / x).exp()
        } else {
            0.0
        }
    }

    fn df(x: f64) -> f64 {
        if x > 0.0 {
            (-1.0 / x).exp() / (x * x)
        } else {
            0.0
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let a = Self::f(x);
        let b = Self::f(1.0 - x);
        a / (a + b)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        let a = Self::f(x);
        let b = Self::f(1.0 - x);
        let da = Self::df(x);
        let db = Self::df(1.0 - x);
        (da * b + a * db) / ((a + b) * (a + b))
    }

    /// sup |ρ₁′| on [0, 1], attained at x = 1/2 by symmetry.
    pub fn derivative_bound(&self) -> f64 {
        (0..=2000)
            .map(|i| self.derivative(i as f64 / 2000.0))
            .fold(0.0, f64::max)
    }
}

/// Pairwise summation with a fixed split order, so results are bit-stable.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Panel budget for [`adaptive_integrate`].
pub const MAX_PANELS: usize = 2000;

/// Globally adaptive Gauss–Legendre integration. The panel with the largest
/// 10/20-point discrepancy is split until the summed discrepancy is below
/// `tol` or the panel budget is spent; the second value is that sum.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x10, w10) = gauss_legendre(10);
    let (x20, w20) = gauss_legendre(20);
    let rule = |x: &[f64], w: &[f64], lo: f64, hi: f64| {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let terms: Vec<f64> = x
            .iter()
            .zip(w)
            .map(|(&xi, &wi)| wi * f(mid + half * xi))
            .collect();
        half * pairwise_sum(&terms)
    };
    let panel = |lo: f64, hi: f64| {
        let fine = rule(&x20, &w20, lo, hi);
        (lo, hi, fine, (fine - rule(&x10, &w10, lo, hi)).abs())
    };
    let mut panels = vec![panel(a, b)];
    loop {
        let total: f64 = panels.iter().map(|p| p.3).sum();
        if total <= tol || panels.len() >= MAX_PANELS {
            break;
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = panels[worst];
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        panels[worst] = panel(lo, mid);
        panels.push(panel(mid, hi));
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let values: Vec<f64> = panels.iter().map(|p| p.2).collect();
    let errs: Vec<f64> = panels.iter().map(|p| p.3).collect();
    (pairwise_sum(&values), pairwise_sum(&errs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(12);
        for deg in 0..24 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 {
                0.0
            } else {
                2.0 / (deg as f64 + 1.0)
            };
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_nodes_are_sorted_and_symmetric() {
        for n in [1, 2, 7, 66, 131] {
            let (x, w) = gauss_legendre(n);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for i in 0..n {
                assert!((x[i] + x[n - 1 - i]).abs() < 1e-15);
                assert!(w[i] > 0.0);
            }
        }
    }

    #[test]
    fn e1_reference_values() {
        // Abramowitz & Stegun table 5.1.
        let cases = [
            (0.1, 1.822_923_958_419_390_7),
            (0.5, 0.559_773_594_776_160_8),
            (1.0, 0.219_383_934_395_520_27),
            (2.0, 0.048_900_510_708_061_12),
            (5.0, 0.001_148_295_591_275_325_6),
            (10.0, 4.156_968_929_685_324e-6),
        ];
        for (x, expected) in cases {
            let got = exp_e1(x);
            assert!(
                (got - expected).abs() < 1e-14,
                "E1({x}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn e1_is_continuous_across_branch_switch() {
        let below = exp_e1(1.0 - 1e-12);
        let above = exp_e1(1.0);
        assert!((below - above).abs() < 1e-11);
    }

    #[test]
    fn e1_matches_quadrature_of_its_definition() {
        for x in [0.3, 1.7, 4.0] {
            // ∫₁^∞ e^{-xt}/t dt with t = 1/v, v ∈ (0, 1]: ∫₀¹ e^{-x/v}/v dv
            let (q, _) = adaptive_integrate(&|v: f64| (-x / v).exp() / v, 0.0, 1.0, 1e-15);
            assert!((q - exp_e1(x)).abs() < 1e-13, "x = {x}");
        }
    }

    #[test]
    fn smooth_step_endpoints_and_symmetry() {
        let s = SmoothStep;
        assert_eq!(s.value(0.0), 0.0);
        assert_eq!(s.value(1.0), 1.0);
        assert!((s.value(0.5) - 0.5).abs() < 1e-15);
        assert_eq!(s.derivative(0.0), 0.0);
        assert_eq!(s.derivative(1.0), 0.0);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            assert!((s.value(x) + s.value(1.0 - x) - 1.0).abs() < 1e-14);
            assert!(s.derivative(x) >= 0.0);
        }
        assert!((s.derivative_bound() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_step_derivative_matches_finite_difference() {
        let s = SmoothStep;
        for x in [0.1, 0.33, 0.5, 0.81] {
            let h = 1e-6;
            let fd = (s.value(x + h) - s.value(x - h)) / (2.0 * h);
            assert!((fd - s.derivative(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn adaptive_integrate_stops_at_noise() {
        // Integrand noise far above the tolerance must not stall the splitter.
        let noisy = |t: f64| (t * 1e9).sin() * 1e-9 + t;
        let (q, _) = adaptive_integrate(&noisy, 0.0, 1.0, 1e-15);
        assert!((q - 0.5).abs() < 1e-8);
    }

    #[test]
    fn adaptive_integrate_handles_endpoint_layers() {
        let (q, err) = adaptive_integrate(&|t: f64| (-200.0 * t).exp(), 0.0, 1.0, 1e-13);
        let exact = (1.0 - (-200.0f64).exp()) / 200.0;
        assert!((q - exact).abs() < 1e-13);
        assert!(err < 1e-12);
    }
}
