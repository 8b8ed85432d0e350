use conformal_torsion::basis::{assemble, build_basis, OperatorPair};
use conformal_torsion::eigen::{generalized_eigs, CholeskyFactor, Spectrum};
use conformal_torsion::heat::{
    heat_operator, laplacian_matrix, resolvent_square_trace, resolvent_trace_constant, semigroup_defect, theta,
};
use conformal_torsion::operator::heat_trace_norm;
use conformal_torsion::ConformalMetric;
use nalgebra::DMatrix;

fn setup(spec: &str) -> (OperatorPair, Spectrum) {
    let b = build_basis(10, 22, 22).unwrap();
    let pair = assemble(&b, &ConformalMetric::parse(spec).unwrap()).unwrap();
    let s = generalized_eigs(&pair).unwrap();
    (pair, s)
}

#[test]
fn heat_operator_tends_to_identity() {
    let (pair, s) = setup("pnorm:4");
    let chol = CholeskyFactor::new(&pair.m).unwrap();
    let id = DMatrix::identity(pair.dim(), pair.dim());
    let top = *s.eigenvalues.last().unwrap();
    for t in [1e-3, 1e-4, 1e-5] {
        let e = heat_operator(&s, &pair.m, t).unwrap();
        let gap = chol.operator_norm(&(e - &id));
        assert!(gap <= 1.0 - (-top * t).exp() + 1e-10, "t = {t}: {gap}");
    }
}

#[test]
fn heat_operator_solves_the_heat_equation() {
    let (pair, s) = setup("smoothmax:0.1");
    let lap = laplacian_matrix(&pair).unwrap();
    let chol = CholeskyFactor::new(&pair.m).unwrap();
    let (t, h) = (0.4, 1e-4);
    let e = |t| heat_operator(&s, &pair.m, t).unwrap();
    let dt = (e(t + h) - e(t - h)) / (2.0 * h);
    let rhs = -(&lap * e(t));
    let rel = chol.operator_norm(&(&dt - &rhs)) / chol.operator_norm(&rhs);
    assert!(rel < 1e-6, "{rel}");
    assert!(semigroup_defect(&s, &pair.m, 0.2, 0.7).unwrap() < 1e-10);
}

#[test]
fn heat_trace_is_a_trace_norm() {
    let (pair, s) = setup("pnorm:3");
    for t in [0.05, 0.5, 3.0] {
        let a = heat_trace_norm(&s, &pair.m, t).unwrap();
        let b = theta(&s, t).unwrap();
        assert!((a - b).abs() <= 1e-10 * b.max(1.0), "t = {t}: {a} vs {b}");
    }
}

#[test]
fn resolvent_square_controls_heat_trace() {
    // e^{−tλ} ≤ c_t (1+λ)^{−2} summed over the nonzero spectrum.
    let (_, s) = setup("max");
    let r = resolvent_square_trace(&s);
    for t in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let c = resolvent_trace_constant(t);
        assert!(theta(&s, t).unwrap() <= c * r * (1.0 + 1e-12), "t = {t}");
    }
    // The constant is the supremum it claims to be.
    for t in [0.1, 0.7, 1.9] {
        let c = resolvent_trace_constant(t);
        let best = (0..20000)
            .map(|i| i as f64 * 1e-3)
            .map(|a| (-t * a).exp() * (1.0 + a).powi(2))
            .fold(0.0, f64::max);
        assert!(best <= c * (1.0 + 1e-12) && best >= c * (1.0 - 1e-5));
    }
}
