use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::adapted::{embed_v_minus, TangentPoint};
use crate::catalog::{flat_euclidean, flat_torsion_group, sphere_s2};
use crate::series::Layout;
use crate::twistor::{circle_grid, point_section, section_residuals};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, order: usize, scale: f64) -> JetVectorField {
    let len = Layout::get(n, order).len();
    let comps = (0..n)
        .map(|_| {
            let coeffs = (0..len)
                .map(|_| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
                .collect();
            Jet::from_coeffs(n, order, coeffs).unwrap()
        })
        .collect();
    JetVectorField::new(vec![c(0.0, 0.0); n], comps, DEFAULT_TRUST_RADIUS).unwrap()
}

fn low_degree_distance(a: &JetVectorField, b: &JetVectorField, max_degree: usize) -> f64 {
    let layout = a.components[0].layout().clone();
    let mut worst: f64 = 0.0;
    for (x, y) in a.components.iter().zip(&b.components) {
        for i in 0..layout.len() {
            if layout.degree(i) <= max_degree {
                worst = worst.max((x.coeffs()[i] - y.coeffs()[i]).norm());
            }
        }
    }
    worst
}

#[test]
fn bracket_of_translation_and_dilation() {
    // [d_x, x d_x] = d_x.
    let center = vec![c(0.0, 0.0)];
    let dx = JetVectorField::constant(center.clone(), &[c(1.0, 0.0)], 4);
    let euler = JetVectorField::new(center, vec![Jet::variable(1, 4, 0, c(0.0, 0.0))], 1.0).unwrap();
    let b = dx.bracket(&euler).unwrap();
    assert!(b.distance(&dx) < 1e-15);
    assert!(dx.algebra_bracket(&euler).unwrap().distance(&dx.scale(c(-1.0, 0.0))) < 1e-15);
}

#[test]
fn bracket_antisymmetry_and_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let k = 5;
    for _ in 0..5 {
        let x = random_field(&mut rng, 2, k, 1.0);
        let y = random_field(&mut rng, 2, k, 1.0);
        let z = random_field(&mut rng, 2, k, 1.0);
        let xy = x.bracket(&y).unwrap();
        let yx = y.bracket(&x).unwrap();
        assert!(xy.add(&yx).unwrap().max_abs() < 1e-12);
        let jac = x
            .bracket(&yz(&y, &z))
            .unwrap()
            .add(&y.bracket(&z.bracket(&x).unwrap()).unwrap())
            .unwrap()
            .add(&z.bracket(&xy).unwrap())
            .unwrap();
        let zero = JetVectorField::zero(x.center.clone(), k);
        assert!(low_degree_distance(&jac, &zero, k - 2) < 1e-10);
    }

    fn yz(y: &JetVectorField, z: &JetVectorField) -> JetVectorField {
        y.bracket(z).unwrap()
    }
}

#[test]
fn mismatched_fields_are_structural_errors() {
    let a = JetVectorField::zero(vec![c(0.0, 0.0); 2], 3);
    let b = JetVectorField::zero(vec![c(1.0, 0.0); 2], 3);
    assert!(matches!(a.bracket(&b), Err(Error::Structure(_))));
    assert!(matches!(a.eval(&[c(0.0, 0.0)]), Err(Error::Structure(_))));
}

#[test]
fn parallel_field_on_flat_space_is_constant() {
    let spec = flat_euclidean(2);
    let v = to_complex(&[0.3, -0.7]);
    let f = parallel_field(&spec, &[0.5, 0.2], &v, 5).unwrap();
    let want = JetVectorField::constant(to_complex(&[0.5, 0.2]), &v, 5);
    assert!(f.distance(&want) < 1e-14);
    let zero = parallel_field(&spec, &[0.5, 0.2], &to_complex(&[0.0, 0.0]), 5).unwrap();
    assert_eq!(zero.max_abs(), 0.0);
}

#[test]
fn parallel_field_on_the_group_is_left_invariant() {
    // v^ = v_a d_a + v_b e^{a - a0} d_b.
    let spec = flat_torsion_group();
    let x = [0.4, -0.3];
    let v = [0.7, -1.1];
    let f = parallel_field(&spec, &x, &to_complex(&v), DEFAULT_ORDER).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let p = vec![
            c(x[0] + rng.gen_range(-0.2..0.2), rng.gen_range(-0.1..0.1)),
            c(x[1] + rng.gen_range(-0.2..0.2), 0.0),
        ];
        let got = f.eval(&p).unwrap();
        let want = [c(v[0], 0.0), (p[0] - x[0]).exp() * v[1]];
        assert!((got[0] - want[0]).norm() < 1e-8 && (got[1] - want[1]).norm() < 1e-8);
    }
}

#[test]
fn curved_connections_are_refused() {
    let spec = sphere_s2();
    assert!(matches!(
        parallel_field(&spec, &[1.0, 0.0], &to_complex(&[1.0, 0.0]), 4),
        Err(Error::NotFlat { .. })
    ));
}

#[test]
fn flows_of_simple_fields() {
    let center = vec![c(0.0, 0.0), c(0.0, 0.0)];
    let constant = JetVectorField::constant(center.clone(), &[c(0.3, 0.1), c(-0.2, 0.0)], 4);
    let p = [c(0.1, 0.0), c(0.05, 0.02)];
    let q = flow_field(&constant, 0.8, &p, 10).unwrap();
    assert!((q[0] - (p[0] + c(0.24, 0.08))).norm() < 1e-15);
    let euler = JetVectorField::new(
        center,
        vec![Jet::variable(2, 4, 0, c(0.0, 0.0)), Jet::variable(2, 4, 1, c(0.0, 0.0))],
        1.0,
    )
    .unwrap();
    let q = flow_field(&euler, 0.5, &p, 200).unwrap();
    for k in 0..2 {
        assert!((q[k] - p[k] * 0.5_f64.exp()).norm() < 1e-12);
    }
}

#[test]
fn flow_of_random_polynomial_field_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = random_field(&mut rng, 2, 4, 0.3);
    let p = [c(0.05, 0.0), c(-0.05, 0.02)];
    let reference = flow_field(&f, 0.3, &p, 4000).unwrap();
    let coarse = flow_field(&f, 0.3, &p, 100).unwrap();
    assert!(max_diff(&coarse, &reference) < 1e-9);
}

#[test]
fn flow_leaving_the_trust_radius() {
    let f = JetVectorField::constant(vec![c(0.0, 0.0)], &[c(1.0, 0.0)], 3).with_trust_radius(0.5);
    assert!(matches!(
        flow_field(&f, 1.0, &[c(0.0, 0.0)], 10),
        Err(Error::TrustRadius { .. })
    ));
}

#[test]
fn flat_identity() {
    let flat = flat_euclidean(3);
    assert!(verify_flat_identity(&flat, &[0.1, 0.2, 0.3], &[0.2, -0.1, 0.05], DEFAULT_ORDER, 50).unwrap() < 1e-14);
    let group = flat_torsion_group();
    assert_eq!(
        verify_flat_identity(&group, &[0.3, 0.1], &[0.0, 0.0], DEFAULT_ORDER, 50).unwrap(),
        0.0
    );
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..5 {
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let v = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
        let r = verify_flat_identity(&group, &p, &v, DEFAULT_ORDER, 200).unwrap();
        assert!(r < 1e-7, "{}", r);
    }
}

fn group_state(v1: [f64; 2], v2: [f64; 2], v3: [f64; 2]) -> NahmState {
    NahmState::initial(
        &flat_torsion_group(),
        &[0.2, -0.1],
        &v1,
        &v2,
        &v3,
        &NahmConfig::default(),
    )
    .unwrap()
}

#[test]
fn commuting_data_is_stationary() {
    let init = NahmState::initial(
        &flat_euclidean(2),
        &[0.0, 0.0],
        &[0.1, 0.0],
        &[0.0, 0.2],
        &[0.1, 0.1],
        &NahmConfig::default(),
    )
    .unwrap();
    let path = nahm_solve(&init, &uniform_grid(4)[1..], 2).unwrap();
    for s in path {
        assert!(s.distance(&init) < 1e-15);
    }
}

#[test]
fn degenerate_data_keeps_b1_constant() {
    let init = group_state([0.1, -0.05], [0.0, 0.0], [0.0, 0.0]);
    let path = nahm_solve(&init, &uniform_grid(4)[1..], 2).unwrap();
    for s in path {
        assert_eq!(s.b0.max_abs(), 0.0);
        assert_eq!(s.b2.max_abs(), 0.0);
        assert!(s.b1.distance(&init.b1) < 1e-15);
    }
}

#[test]
fn nahm_flow_preserves_reality_and_is_fourth_order() {
    let init = group_state([0.05, 0.08], [0.1, -0.04], [-0.06, 0.09]);
    assert!(init.reality_residual() < 1e-15);
    let path = nahm_path(&init, 16).unwrap();
    assert!(path_reality_residual(&path) < 1e-7);
    assert!(path.last().unwrap().distance(&init) > 1e-4);
    let big = group_state([0.5, 0.8], [1.0, -0.4], [-0.6, 0.9]);
    let order = nahm_convergence_order(&big, 4).unwrap();
    assert!((order - 4.0).abs() < 0.3, "{}", order);
}

#[test]
fn zero_data_gives_identity_frames() {
    let init = group_state([0.0; 2], [0.0; 2], [0.0; 2]);
    let path = nahm_path(&init, 4).unwrap();
    let x = to_complex(&[0.2, -0.1]);
    let f = frame_integrate(&path, c(0.6, 0.8), &x).unwrap();
    assert_eq!(f.plus, x);
    assert_eq!(f.minus, x);
}

#[test]
fn degenerate_frame_reaches_the_embedded_point() {
    let spec = flat_torsion_group();
    let v1 = [0.12, -0.09];
    let init = group_state(v1, [0.0; 2], [0.0; 2]);
    let path = nahm_path(&init, 32).unwrap();
    let x = to_complex(&[0.2, -0.1]);
    let f = frame_integrate(&path, c(1.0, 0.0), &x).unwrap();
    let m = embed_v_minus(&spec, &TangentPoint::new(vec![0.2, -0.1], v1.to_vec()), 200).unwrap();
    assert!(max_diff(&f.plus, &m) < 1e-6);
}

#[test]
fn riemann_hilbert_factorization_holds() {
    let init = group_state([0.05, 0.08], [0.1, -0.04], [-0.06, 0.09]);
    let path = nahm_path(&init, 32).unwrap();
    let x = to_complex(&[0.2, -0.1]);
    for zeta in circle_grid(1.0, 4).into_iter().chain([c(0.6, 0.0), c(0.0, 1.5)]) {
        let r = riemann_hilbert_residual(&path, zeta, &x, &[32, 64], 100).unwrap();
        assert!(r < 1e-6, "zeta {} residual {}", zeta, r);
    }
}

#[test]
fn frame_rejects_zeta_outside_annulus() {
    let init = group_state([0.0; 2], [0.0; 2], [0.0; 2]);
    let path = nahm_path(&init, 2).unwrap();
    assert!(frame_integrate(&path, c(0.1, 0.0), &to_complex(&[0.2, -0.1])).is_err());
}

#[test]
fn zero_data_gives_constant_section() {
    let spec = flat_torsion_group();
    let s = nahm_section(
        &spec,
        &[0.2, -0.1],
        &[0.0; 2],
        &[0.0; 2],
        &[0.0; 2],
        &NahmConfig::default(),
    )
    .unwrap();
    let p = s.eval(Patch::Zero, c(0.3, 0.4)).unwrap();
    assert_eq!(p.y, to_complex(&[0.2, -0.1]));
    assert_eq!(p.beta, vec![c(0.0, 0.0); 2]);
}

#[test]
fn degenerate_section_matches_point_section() {
    let spec = flat_torsion_group();
    let x = [0.2, -0.1];
    let v1 = [0.1, 0.07];
    let s = nahm_section(&spec, &x, &v1, &[0.0; 2], &[0.0; 2], &NahmConfig::default()).unwrap();
    let p = point_section(&spec, &TangentPoint::new(x.to_vec(), v1.to_vec()), 200).unwrap();
    for zeta in circle_grid(1.0, 6).into_iter().chain([c(0.0, 0.0), c(1.5, 0.0)]) {
        for patch in [Patch::Zero, Patch::Infinity] {
            let a = s.eval(patch, zeta).unwrap();
            let b = p.eval(patch, zeta).unwrap();
            assert!(a.distance(&b) < 1e-6, "{}", a.distance(&b));
        }
    }
}

#[test]
fn generic_sections_glue_and_are_real() {
    let spec = flat_torsion_group();
    let s = nahm_section(
        &spec,
        &[0.2, -0.1],
        &[0.05, 0.08],
        &[0.1, -0.04],
        &[-0.06, 0.09],
        &NahmConfig::default(),
    )
    .unwrap();
    let mut grid = circle_grid(1.0, 16);
    grid.extend([c(0.6, 0.0), c(1.5, 0.0), c(0.0, 0.6), c(0.0, 1.5)]);
    let r = section_residuals(&spec, &s, &grid, 200);
    assert!(r.gluing < 1e-6 && r.reality < 1e-6, "{:?}", r);
}

#[test]
fn section_family_has_full_rank() {
    for spec in [flat_euclidean(2), flat_torsion_group()] {
        let report = section_family_rank(
            &spec,
            &[0.2, -0.1],
            &circle_grid(1.0, 4),
            1e-5,
            &NahmConfig {
                frame_steps: 8,
                ..NahmConfig::default()
            },
        )
        .unwrap();
        assert_eq!(report.rank, 8);
        assert!(report.ratio > 1e-6);
    }
}

#[test]
fn reality_residual_detects_broken_data() {
    let mut s = group_state([0.05, 0.08], [0.1, -0.04], [-0.06, 0.09]);
    s.b2 = s.b2.scale(c(1.001, 0.0));
    assert!(s.reality_residual() > 1e-5);
}
