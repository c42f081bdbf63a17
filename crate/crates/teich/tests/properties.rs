//! Property tests for the invariants that hold on whole input families.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use proptest::prelude::*;

use teich::beltrami::{dilatation_of_norm, BeltramiField};
use teich::deform::{
    deform_surface, eta_even, eta_odd, inverse_deform_surface, reduce_modulus, DeformationParam,
};
use teich::flatsurf::samples::parallelogram_torus;
use teich::grid::GridDomain;
use teich::rat::RatComplex;

fn rational(n: i64, d: u32) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d as i64))
}

/// Parallelogram tori with rational generators and positive orientation.
fn torus_strategy() -> impl Strategy<Value = (RatComplex, RatComplex)> {
    (1i64..40, -20i64..20, -20i64..20, 1i64..40, 1u32..8, 1u32..8).prop_filter_map(
        "positively oriented",
        |(a, b, c, d, q1, q2)| {
            let e1 = RatComplex::new(rational(a, q1), rational(b, q1));
            let e2 = RatComplex::new(rational(c, q2), rational(d, q2));
            // cross(e1, e2) > 0 keeps the polygon counterclockwise.
            let cross = &e1.re * &e2.im - &e1.im * &e2.re;
            (cross > BigRational::from_integer(BigInt::from(0))).then_some((e1, e2))
        },
    )
}

proptest! {
    #[test]
    fn norm_is_quadratic_under_scaling((e1, e2) in torus_strategy(), lambda in 0.1f64..10.0) {
        let t = parallelogram_torus(e1, e2);
        let scaled = t.scale(lambda);
        let want = lambda * lambda * t.qd_norm();
        prop_assert!((scaled.qd_norm() - want).abs() <= 1e-12 * want.max(1e-12));
    }

    #[test]
    fn deformation_round_trips_exactly((e1, e2) in torus_strategy(), num in 0i64..99) {
        let t = parallelogram_torus(e1, e2);
        let k = DeformationParam::from_rational(rational(num, 100)).unwrap();
        let back = inverse_deform_surface(&deform_surface(&t, &k), &k);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn cone_data_survives_deformation((e1, e2) in torus_strategy(), kv in 0.0f64..0.95) {
        let t = parallelogram_torus(e1, e2);
        let k = DeformationParam::new(kv).unwrap();
        let d = deform_surface(&t, &k);
        prop_assert_eq!(d.genus(), t.genus());
        prop_assert_eq!(d.cone_points(), t.cone_points());
    }

    #[test]
    fn dilatation_is_monotone(a in 0.0f64..0.99, b in 0.0f64..0.99) {
        prop_assume!(a < b);
        prop_assert!(dilatation_of_norm(a) < dilatation_of_norm(b));
    }

    #[test]
    fn eta_identities_hold_pointwise(
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
        kv in 0.0f64..0.9,
        n in 1u32..4,
    ) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() > 1e-3);
        let k = DeformationParam::new(kv).unwrap();
        let affine = |w: Complex64| (w + kv * w.conj()) / (1.0 - kv);
        let eta = eta_even(z, &k, n);
        prop_assert!((eta.powu(n + 1) - affine(z.powu(n + 1))).norm() < 1e-11);
        let m = 2 * n - 1;
        let eta = eta_odd(z, &k, m);
        let zeta = z.sqrt();
        let xi = affine(zeta.powu(m + 2));
        prop_assert!((eta.powu(m + 2) - xi * xi).norm() < 1e-11);
    }

    #[test]
    fn admissibility_boundary_is_exact(quadrant in 0usize..4, idx in 0usize..16) {
        // |ν| = 1 exactly is rejected; one ulp below is accepted.
        let unit = [
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ][quadrant];
        let domain = GridDomain::rectangle(0.0, 0.0, 1.0, 1.0, 4, 4).unwrap();
        let mut values = vec![Complex64::new(0.0, 0.0); 16];
        values[idx] = unit;
        prop_assert!(BeltramiField::new(domain.clone(), values.clone()).is_err());
        values[idx] = unit * (1.0 - f64::EPSILON);
        prop_assert!(BeltramiField::new(domain, values).is_ok());
    }

    #[test]
    fn reduced_modulus_lands_in_fundamental_domain(re in -30.0f64..30.0, im in 0.01f64..30.0) {
        let tau = reduce_modulus(Complex64::new(re, im));
        prop_assert!(tau.im > 0.0);
        prop_assert!(tau.re.abs() <= 0.5 + 1e-12);
        prop_assert!(tau.norm() >= 1.0 - 1e-12);
    }
}
