use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::catalog::{flat_euclidean, flat_torsion_group, sphere_s2};
use crate::error::Error;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn re(v: &[f64]) -> Vec<Complex64> {
    to_complex(v)
}

#[test]
fn flat_flow_is_straight_line() {
    let spec = flat_euclidean(2);
    let s = PhaseState::new(vec![c(0.1, 0.2), c(-0.3, 0.0)], vec![c(1.0, 0.1), c(0.2, -0.1)]);
    let z = c(0.7, 0.1);
    let out = geodesic_flow(&spec, &s, z, 10).unwrap();
    for k in 0..2 {
        assert!((out.y[k] - (s.y[k] + z * s.beta[k])).norm() < 1e-14);
        assert!((out.beta[k] - s.beta[k]).norm() < 1e-14);
    }
}

#[test]
fn sphere_equator_is_a_geodesic() {
    let spec = sphere_s2();
    let s = PhaseState::real(&[FRAC_PI_2, 0.0], &[0.0, 1.0]);
    for t in [0.5, 1.0, 2.5] {
        let out = geodesic_flow(&spec, &s, c(t, 0.0), 400).unwrap();
        assert!((out.y[0] - c(FRAC_PI_2, 0.0)).norm() < 1e-12);
        assert!((out.y[1] - c(t, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn zero_time_is_identity() {
    let spec = sphere_s2();
    let s = PhaseState::new(vec![c(1.0, 0.1), c(0.3, -0.2)], vec![c(0.4, 0.1), c(-0.2, 0.3)]);
    assert_eq!(geodesic_flow(&spec, &s, c(0.0, 0.0), 5).unwrap(), s);
}

#[test]
fn zero_steps_rejected() {
    let spec = flat_euclidean(1);
    let s = PhaseState::real(&[0.0], &[1.0]);
    assert!(matches!(
        geodesic_flow(&spec, &s, c(1.0, 0.0), 0),
        Err(Error::Config(_))
    ));
}

#[test]
fn leaving_the_tube_is_reported_with_fraction() {
    let spec = flat_euclidean(1);
    let s = PhaseState::real(&[0.0], &[1.0]);
    match geodesic_flow(&spec, &s, c(0.0, 1.0), 100) {
        Err(Error::DomainExit { fraction, .. }) => assert!((fraction - 0.51).abs() < 0.011, "{}", fraction),
        other => panic!("unexpected {:?}", other),
    }
}

#[test]
fn blow_up_is_detected() {
    // y'' = y'^2 blows up at t = 1 from y'(0) = 1.
    let mut g = crate::geometry::ManifoldSpec::zero_christoffel(1);
    g[0][0][0] = crate::series::Expr::c(-1.0);
    let mut spec = ManifoldSpec::from_christoffel(g, ChartDomain::cube(1, 1e9));
    spec.blowup_bound = 1e3;
    let s = PhaseState::real(&[0.0], &[1.0]);
    assert!(matches!(
        geodesic_flow(&spec, &s, c(2.0, 0.0), 400),
        Err(Error::BlowUp { .. })
    ));
}

#[test]
fn exp_flat_and_zero_velocity() {
    let spec = flat_euclidean(3);
    let y = vec![c(0.1, 0.0), c(0.2, 0.1), c(-0.4, 0.0)];
    let v = vec![c(1.0, 0.0), c(0.0, 1.0), c(0.5, 0.5)];
    let z = c(0.2, -0.3);
    let e = exp_c(&spec, &y, &v, z, 4).unwrap();
    for k in 0..3 {
        assert!((e[k] - (y[k] + z * v[k])).norm() < 1e-14);
    }
    let sphere = sphere_s2();
    let y = vec![c(1.0, 0.1), c(0.2, 0.0)];
    let zero = vec![c(0.0, 0.0); 2];
    assert_eq!(exp_c(&sphere, &y, &zero, c(0.5, 0.5), 50).unwrap(), y);
}

#[test]
fn exp_matches_real_exponential_on_real_data() {
    let spec = sphere_s2();
    let y = re(&[1.0, 0.3]);
    let v = re(&[0.4, -0.7]);
    let e = exp_c(&spec, &y, &v, c(0.8, 0.0), 200).unwrap();
    assert!(e.iter().all(|x| x.im == 0.0));
}

#[test]
fn semigroup_identity_on_sphere() {
    let spec = sphere_s2();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let y = re(&[1.2, 0.1]);
    let v = re(&[0.3, 0.5]);
    for _ in 0..20 {
        let z1 = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.4..0.4));
        let z2 = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.4..0.4));
        let direct = exp_c(&spec, &y, &v, z1 + z2, 400).unwrap();
        let mid = geodesic_flow(&spec, &PhaseState::new(y.clone(), v.clone()), z2, 400).unwrap();
        let two_step = exp_c(&spec, &mid.y, &mid.beta, z1, 400).unwrap();
        assert!(max_diff(&direct, &two_step) < 1e-9, "{}", max_diff(&direct, &two_step));
    }
}

#[test]
fn conjugation_equivariance() {
    let spec = sphere_s2();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let y = vec![
            c(rng.gen_range(1.0..2.0), rng.gen_range(-0.2..0.2)),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-0.2..0.2)),
        ];
        let v = vec![
            c(rng.gen_range(-0.4..0.4), rng.gen_range(-0.2..0.2)),
            c(rng.gen_range(-0.4..0.4), rng.gen_range(-0.2..0.2)),
        ];
        let z = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let a = exp_c(&spec, &y, &v, z, 100).unwrap();
        let yc: Vec<_> = y.iter().map(|x| x.conj()).collect();
        let vc: Vec<_> = v.iter().map(|x| x.conj()).collect();
        let b = exp_c(&spec, &yc, &vc, z.conj(), 100).unwrap();
        let ac: Vec<_> = a.iter().map(|x| x.conj()).collect();
        assert!(max_diff(&ac, &b) < 1e-12);
    }
}

#[test]
fn path_independence_in_complex_time() {
    let spec = sphere_s2();
    let s = PhaseState::real(&[1.1, 0.0], &[0.4, 0.6]);
    let z = c(0.9, 0.4);
    let straight = geodesic_flow(&spec, &s, z, 400).unwrap();
    let corner = geodesic_flow_path(&spec, &s, &[c(0.9, 0.0), z], 400).unwrap();
    let other = geodesic_flow_path(&spec, &s, &[c(0.0, 0.4), c(0.3, -0.1), z], 400).unwrap();
    assert!(straight.distance(&corner) < 1e-8);
    assert!(straight.distance(&other) < 1e-8);
}

#[test]
fn fourth_order_step_halving() {
    let spec = sphere_s2();
    let s = PhaseState::real(&[1.1, 0.0], &[0.5, 0.7]);
    let z = c(1.5, 0.4);
    let reference = geodesic_flow(&spec, &s, z, 4000).unwrap();
    let e1 = geodesic_flow(&spec, &s, z, 20).unwrap().distance(&reference);
    let e2 = geodesic_flow(&spec, &s, z, 40).unwrap().distance(&reference);
    let ratio = e1 / e2;
    assert!((12.0..20.0).contains(&ratio), "ratio {}", ratio);
}

#[test]
fn differential_flat_and_zero_time() {
    let spec = flat_euclidean(2);
    let y = re(&[0.1, 0.2]);
    let v = re(&[0.3, -0.4]);
    let z = c(0.5, 0.25);
    let d = exp_c_differential(&spec, &y, &v, z, 8).unwrap();
    let e = d.exp_block();
    for i in 0..2 {
        for j in 0..4 {
            let want = if j == i {
                c(1.0, 0.0)
            } else if j == i + 2 {
                z
            } else {
                c(0.0, 0.0)
            };
            assert!((e[(i, j)] - want).norm() < 1e-14);
        }
    }
    let sphere = sphere_s2();
    let d0 = exp_c_differential(&sphere, &re(&[1.0, 0.0]), &re(&[0.3, 0.2]), c(0.0, 0.0), 8).unwrap();
    let e0 = d0.exp_block();
    for i in 0..2 {
        for j in 0..4 {
            let want = if j == i { 1.0 } else { 0.0 };
            assert!((e0[(i, j)] - c(want, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn differential_matches_finite_differences_on_sphere() {
    let spec = sphere_s2();
    let y = re(&[1.2, 0.3]);
    let v = re(&[0.4, 0.6]);
    let z = c(0.0, 0.3);
    let steps = 200;
    let d = exp_c_differential(&spec, &y, &v, z, steps).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for col in 0..4 {
        let (mut yp, mut ym, mut vp, mut vm) = (y.clone(), y.clone(), v.clone(), v.clone());
        if col < 2 {
            yp[col] += h;
            ym[col] -= h;
        } else {
            vp[col - 2] += h;
            vm[col - 2] -= h;
        }
        let fp = exp_c(&spec, &yp, &vp, z, steps).unwrap();
        let fm = exp_c(&spec, &ym, &vm, z, steps).unwrap();
        for row in 0..2 {
            let fd = (fp[row] - fm[row]) / (2.0 * h);
            worst = worst.max((fd - d.matrix[(row, col)]).norm());
        }
    }
    assert!(worst < 1e-6, "{}", worst);
}

#[test]
fn jacobi_field_flat() {
    let spec = flat_euclidean(2);
    let u0 = re(&[0.2, -0.1]);
    let ud = re(&[0.5, 0.3]);
    let grid: Vec<Complex64> = [0.5, 1.0, 1.5].iter().map(|&t| c(t, 0.0)).collect();
    let samples = jacobi_field(&spec, &re(&[0.0, 0.0]), &re(&[1.0, 0.0]), &u0, &ud, &grid, 10).unwrap();
    for s in samples {
        for k in 0..2 {
            assert!((s.u[k] - (u0[k] + s.t * ud[k])).norm() < 1e-14);
            assert!((s.u_dot[k] - ud[k]).norm() < 1e-14);
        }
    }
}

#[test]
fn jacobi_field_on_sphere_is_sine() {
    let spec = sphere_s2();
    let grid = vec![c(FRAC_PI_2, 0.0)];
    let s = jacobi_field(
        &spec,
        &re(&[FRAC_PI_2, 0.0]),
        &re(&[0.0, 1.0]),
        &re(&[0.0, 0.0]),
        &re(&[1.0, 0.0]),
        &grid,
        400,
    )
    .unwrap();
    let g = spec.metric_complex(&s[0].position).unwrap();
    let norm2 = g[(0, 0)] * s[0].u[0] * s[0].u[0] + g[(1, 1)] * s[0].u[1] * s[0].u[1];
    assert!((norm2.sqrt() - c(1.0, 0.0)).norm() < 1e-7);
}

#[test]
fn tangential_jacobi_field_is_the_velocity() {
    let spec = sphere_s2();
    let y = re(&[1.1, 0.2]);
    let v = re(&[0.4, 0.5]);
    let grid: Vec<Complex64> = [0.3, 0.8].iter().map(|&t| c(t, 0.0)).collect();
    let s = jacobi_field(&spec, &y, &v, &v, &re(&[0.0, 0.0]), &grid, 400).unwrap();
    for sample in s {
        assert!(max_diff(&sample.u, &sample.velocity) < 1e-10);
        assert!(max_abs(&sample.u_dot) < 1e-10);
    }
}

#[test]
fn parallel_transport_flat_and_zero_length() {
    let flat = flat_euclidean(2);
    let w0 = re(&[0.3, 0.7]);
    let w = parallel_transport(&flat, &re(&[0.0, 0.0]), &re(&[1.0, 2.0]), &[c(1.5, 0.0)], &w0, 10).unwrap();
    assert!(max_diff(&w[0], &w0) < 1e-15);
    let sphere = sphere_s2();
    let w = parallel_transport(&sphere, &re(&[1.0, 0.0]), &re(&[0.3, 0.4]), &[c(0.0, 0.0)], &w0, 10).unwrap();
    assert_eq!(w[0], w0);
}

#[test]
fn parallel_transport_is_metric_compatible() {
    let spec = sphere_s2();
    let y = re(&[FRAC_PI_2, 0.0]);
    let v = re(&[0.0, 1.0]);
    let w0 = re(&[0.3, 0.7]);
    let grid: Vec<Complex64> = (1..=8).map(|i| c(i as f64 * PI / 16.0, 0.0)).collect();
    let ws = parallel_transport(&spec, &y, &v, &grid, &w0, 200).unwrap();
    let start = spec.pairing(&y, &w0, &v).unwrap();
    for (t, w) in grid.iter().zip(&ws) {
        let st = geodesic_flow(&spec, &PhaseState::new(y.clone(), v.clone()), *t, 200).unwrap();
        let p = spec.pairing(&st.y, w, &st.beta).unwrap();
        assert!((p - start).norm() < 1e-8);
        let n2 = spec.pairing(&st.y, w, w).unwrap();
        assert!((n2 - spec.pairing(&y, &w0, &w0).unwrap()).norm() < 1e-8);
    }
}

#[test]
fn curvature_of_the_torsion_group_vanishes() {
    assert!(max_curvature(&flat_torsion_group()).unwrap() < 1e-14);
}

#[test]
fn sphere_curvature_matches_gauss_curvature_one() {
    // R^r_{phi r phi} = sin^2 r for the unit sphere.
    let spec = sphere_s2();
    let r0 = 1.1_f64;
    let r = curvature_at(&spec, &re(&[r0, 0.0])).unwrap();
    assert!((r[0][1][0][1] - c(r0.sin().powi(2), 0.0)).norm() < 1e-12);
}
