use conformal_torsion::operator::{
    equivalence_bounds, fatou_sums, lidskii_residual, singular_values, tail_infimum, trace_norm, InnerProduct,
};
use conformal_torsion::{ConformalMetric, SpherePoint};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| DMatrix::from_vec(n, n, v))
}

fn gram(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    matrix(n).prop_map(move |g| &g * g.transpose() + DMatrix::identity(n, n) * 0.3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_one_singular_value(u in prop::collection::vec(-1.0f64..1.0, 5),
                               v in prop::collection::vec(-1.0f64..1.0, 5),
                               g in gram(5)) {
        // A = u vᵀ: ‖A‖ = ‖u‖_G · (vᵀG⁻¹v)^{1/2}, and it is the only nonzero singular value.
        let (u, v) = (DVector::from_vec(u), DVector::from_vec(v));
        let a = &u * v.transpose();
        let ginv = g.clone().try_inverse().unwrap();
        let want = u.dot(&(&g * &u)).sqrt() * v.dot(&(&ginv * &v)).sqrt();
        let ip = InnerProduct::new(g).unwrap();
        let s = singular_values(&a, &ip).unwrap();
        prop_assert!((s[0] - want).abs() <= 1e-9 * want.max(1.0));
        prop_assert!(s[1..].iter().all(|x| x.abs() <= 1e-9 * want.max(1.0)));
        prop_assert!((trace_norm(&a, &ip).unwrap() - want).abs() <= 1e-8 * want.max(1.0));
    }

    #[test]
    fn trace_norm_is_a_norm(a in matrix(4), b in matrix(4), g in gram(4), c in -3.0f64..3.0) {
        let ip = InnerProduct::new(g).unwrap();
        let na = trace_norm(&a, &ip).unwrap();
        let nb = trace_norm(&b, &ip).unwrap();
        prop_assert!(trace_norm(&(&a + &b), &ip).unwrap() <= na + nb + 1e-10);
        prop_assert!((trace_norm(&(&a * c), &ip).unwrap() - c.abs() * na).abs() <= 1e-10 * na.max(1.0));
        prop_assert!(a.trace().abs() <= na + 1e-10);
        prop_assert!(lidskii_residual(&a, &ip).unwrap() <= 1e-10 * na.max(1.0));
    }

    #[test]
    fn equivalent_inner_products(a in matrix(4), g1 in gram(4), g2 in gram(4)) {
        let b = equivalence_bounds(&a, &InnerProduct::new(g1).unwrap(), &InnerProduct::new(g2).unwrap()).unwrap();
        prop_assert!(b.holds(), "{b:?}");
    }

    #[test]
    fn pnorm_densities_are_ordered(x in -1.0f64..1.0, phi in 0.0f64..std::f64::consts::TAU, p in 1u32..40) {
        let pt = SpherePoint::new(x, phi);
        let lo = ConformalMetric::parse(&format!("pnorm:{p}")).unwrap().density(pt);
        let hi = ConformalMetric::parse(&format!("pnorm:{}", p + 1)).unwrap().density(pt);
        let max = ConformalMetric::parse("max").unwrap().density(pt);
        prop_assert!(1.0 - 1e-12 <= lo && lo <= hi * (1.0 + 1e-12) && hi <= max * (1.0 + 1e-12));
    }

    #[test]
    fn fatou_inequality(rows in prop::collection::vec(prop::collection::vec(0.0f64..2.0, 6), 3..12)) {
        let (sum_of_inf, inf_of_sum) = fatou_sums(&rows, 1).unwrap();
        prop_assert!(sum_of_inf <= inf_of_sum + 1e-12);
    }
}

#[test]
fn fatou_is_strict_on_moving_mass() {
    // a[n][k] = 1 when k = n mod 3: every column has lim inf 0, every row sums to 1.
    let rows: Vec<Vec<f64>> = (0..9).map(|n| (0..3).map(|k| f64::from(u8::from(k == n % 3))).collect()).collect();
    assert_eq!(fatou_sums(&rows, 0).unwrap(), (0.0, 1.0));
    assert_eq!(tail_infimum(&[3.0, 1.0, 2.0], 2), 2.0);
    assert!(fatou_sums(&[vec![-1.0]], 0).is_err());
}
