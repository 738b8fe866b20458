//! Values checked against independent references: closed forms, and an
//! mpmath evaluation at 30 digits (`scripts/pv_oracle.py`) for the extremal
//! polynomials.

use std::f64::consts::PI;

use num_rational::BigRational;
use oscint_core::extremal::{construct_extremal, kernel_normalizer, leading_coefficient_formula};
use oscint_core::poly::Poly;
use oscint_core::pvint::{pv_integral, pv_integral_extremal, PvOptions};
use oscint_core::sublevel::{sublevel_measure, vinogradov_bound};

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

#[test]
fn extremal_values_match_mpmath() {
    let opts = PvOptions::new(1e-10);
    for (n, reference) in [(3, 2.03617132260936), (4, 2.57541222606269)] {
        let e = construct_extremal(n, n).unwrap();
        let r = pv_integral_extremal(&e, &opts).unwrap();
        assert!(r.converged);
        assert!((r.value - reference).abs() < 1e-12, "n = {n}: {}", r.value);
    }
}

#[test]
fn cubic_matches_mpmath() {
    let p = Poly::exact(vec![ratio(0, 1), ratio(1, 1), ratio(0, 1), ratio(1, 3)]);
    let r = pv_integral(&p, 1e-11).unwrap();
    assert!((r.value - 2.53202320176192).abs() < 1e-12, "{}", r.value);
}

#[test]
fn monomials_follow_dirichlet_scaling() {
    for d in [1usize, 5, 11] {
        let r = pv_integral(&Poly::monomial(d), 1e-10).unwrap();
        assert!((r.value - PI / d as f64).abs() < 1e-9, "d = {d}");
    }
    assert_eq!(pv_integral(&Poly::monomial(4), 1e-10).unwrap().value, 0.0);
}

#[test]
fn dilation_leaves_value_unchanged() {
    let p = Poly::exact(vec![ratio(0, 1), ratio(1, 1), ratio(0, 1), ratio(1, 1)]);
    let q = Poly::exact(vec![ratio(0, 1), ratio(2, 1), ratio(0, 1), ratio(8, 1)]);
    let a = pv_integral(&p, 1e-10).unwrap().value;
    let b = pv_integral(&q, 1e-10).unwrap().value;
    assert!((a - b).abs() < 1e-9);
}

#[test]
fn normalizer_and_leading_coefficient() {
    assert_eq!(kernel_normalizer(1).unwrap(), ratio(3, 8));
    assert_eq!(kernel_normalizer(2).unwrap(), ratio(315, 512));
    for n in 2..=6 {
        let e = construct_extremal(n, n).unwrap();
        assert_eq!(e.a_k, leading_coefficient_formula(n, n).unwrap());
    }
}

#[test]
fn quadratic_sublevel_set_is_exact() {
    // |t² − 2| ≤ 1 on [1, 2] is [1, √3].
    let h = Poly::exact(vec![ratio(-2, 1), ratio(0, 1), ratio(1, 1)]);
    let r = sublevel_measure(&h, 1.0, 1.0, 2.0).unwrap();
    assert!((r.measure - (3f64.sqrt() - 1.0)).abs() < 1e-12);
    let bound = vinogradov_bound(&h, 1.0).unwrap();
    assert!(r.measure <= bound);
}
