use num_complex::Complex64;
use proptest::prelude::*;
use twistorlab::adapted::TangentPoint;
use twistorlab::catalog::{hyperbolic_h2, sphere_s2};
use twistorlab::twistor::{
    point_section, real_structure, section_residuals, transition, transition_inverse, Moebius, Patch, TwistorPoint,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn sphere_point() -> impl Strategy<Value = TwistorPoint> {
    (
        prop::array::uniform4(-0.1..0.1f64),
        prop::array::uniform4(-0.15..0.15f64),
        0.7..1.4f64,
        0.0..std::f64::consts::TAU,
    )
        .prop_map(|(y, b, r, arg)| {
            TwistorPoint::new(
                Patch::Zero,
                vec![c(1.5 + y[0], y[1]), c(y[2], y[3])],
                vec![c(b[0], b[1]), c(b[2], b[3])],
                Complex64::from_polar(r, arg),
            )
        })
}

fn near_identity() -> impl Strategy<Value = Moebius> {
    prop::array::uniform6(-0.15..0.15f64).prop_map(|e| {
        let a = c(1.0 + e[0], e[1]);
        let b = c(e[2], e[3]);
        let cc = c(e[4], e[5]);
        Moebius::new(a, b, cc, (c(1.0, 0.0) + b * cc) / a).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transition_round_trip(tp in sphere_point()) {
        let spec = sphere_s2();
        let back = transition_inverse(&spec, &transition(&spec, &tp, 200).unwrap(), 200).unwrap();
        prop_assert!(back.distance(&tp) < 1e-9);
    }

    #[test]
    fn real_structure_is_an_involution(tp in sphere_point()) {
        let spec = sphere_s2();
        let twice = real_structure(&spec, &real_structure(&spec, &tp).unwrap()).unwrap();
        prop_assert!(twice.distance(&tp) < 1e-15);
    }

    #[test]
    fn moebius_matrices_form_a_group(g in near_identity(), h in near_identity(), k in near_identity()) {
        let lhs = g.compose(&h).compose(&k);
        let rhs = g.compose(&h.compose(&k));
        for (a, b) in [(lhs.a, rhs.a), (lhs.b, rhs.b), (lhs.c, rhs.c), (lhs.d, rhs.d)] {
            prop_assert!((a - b).norm() < 1e-14);
        }
        let id = g.compose(&g.inverse());
        prop_assert!((id.a - 1.0).norm() < 1e-14 && id.b.norm() < 1e-14 && id.c.norm() < 1e-14);
        let z = c(0.3, -0.2);
        let composed = g.compose(&h).apply(z).unwrap();
        let nested = g.apply(h.apply(z).unwrap()).unwrap();
        prop_assert!((composed - nested).norm() < 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn point_sections_glue_and_are_real(r in 1.0..3.0f64, phi in -1.0..1.0f64, v in prop::array::uniform2(-0.1..0.1f64)) {
        let spec = hyperbolic_h2();
        let vphi = v[1] / r.sinh();
        let s = point_section(&spec, &TangentPoint::new(vec![r, phi], vec![v[0], vphi]), 200).unwrap();
        let grid = twistorlab::twistor::circle_grid(1.0, 6);
        let res = section_residuals(&spec, &s, &grid, 200);
        prop_assert!(res.gluing < 1e-7 && res.reality < 1e-7, "{:?}", res);
    }
}
