use proptest::prelude::*;
use twistorlab::catalog::{hyperbolic_h2, sphere_s2};
use twistorlab::metric::omega_triple_at_x;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn form_triple_invariants_on_the_sphere(r in 0.4..2.7f64, phi in -3.0..3.0f64) {
        let t = omega_triple_at_x(&sphere_s2(), &[r, phi]).unwrap();
        prop_assert!(t.symmetry_defect() < 1e-12);
        prop_assert!(t.reconstruction_defect() < 1e-7);
        prop_assert!(t.quaternion_defect() < 1e-12);
        prop_assert!(t.block_orthogonality_defect() < 1e-9);
        prop_assert!(t.fit_residual < 1e-9);
    }

    #[test]
    fn omega_forms_are_antisymmetric(r in 0.4..3.5f64, phi in -3.0..3.0f64) {
        let t = omega_triple_at_x(&hyperbolic_h2(), &[r, phi]).unwrap();
        for w in &t.omega {
            prop_assert!((w + w.transpose()).amax() < 1e-12);
        }
    }
}
