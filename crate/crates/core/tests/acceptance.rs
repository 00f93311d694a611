//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twistorlab::adapted::{adapted_j, leaf_grid, leaf_holomorphicity_residual, standard_structure, TangentPoint};
use twistorlab::catalog::{self, circle, flat_euclidean, flat_minkowski, flat_torsion_group, hyperbolic_h2, sphere_s2};
use twistorlab::geometry::{to_complex, ManifoldSpec};
use twistorlab::metric::{
    jacobi_identity_check, lempert_szoke_check, omega_triple_at_x, signature_at_x, LempertSzokeSample,
};
use twistorlab::nahm::{
    nahm_convergence_order, nahm_path, nahm_section, path_reality_residual, riemann_hilbert_residual,
    section_family_rank, verify_flat_identity, NahmConfig, NahmState, DEFAULT_ORDER,
};
use twistorlab::twistor::{
    circle_grid, h0_profile, moebius_action, point_section, rotated_reality_residual, section_residuals, transition,
    transition_inverse, Moebius, Patch, TwistorPoint,
};
use twistorlab::Result;

const STEPS: usize = 200;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

struct Outcome {
    pass: bool,
    summary: String,
}

fn outcome(checks: &[(&str, f64, f64)]) -> Outcome {
    let pass = checks.iter().all(|(_, r, tol)| r <= tol);
    let summary = checks
        .iter()
        .map(|(name, r, tol)| format!("{} {:.2e} (<= {:.0e})", name, r, tol))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome { pass, summary }
}

fn unit(spec: &ManifoldSpec, x: &[f64], raw: &[f64]) -> Vec<f64> {
    let g = spec.metric_real(x).ok();
    let len2: f64 = match g {
        Some(g) => (0..raw.len())
            .flat_map(|a| (0..raw.len()).map(move |b| (a, b)))
            .map(|(a, b)| g[(a, b)] * raw[a] * raw[b])
            .sum(),
        None => raw.iter().map(|a| a * a).sum(),
    };
    raw.iter().map(|a| a / len2.abs().sqrt()).collect()
}

fn adaptedness() -> Result<Outcome> {
    let grid = leaf_grid(1.0, 0.3, 9, 5);
    let mut curved: f64 = 0.0;
    let mut flat: f64 = 0.0;
    for (spec, is_flat) in [
        (circle(), true),
        (flat_torsion_group(), true),
        (sphere_s2(), false),
        (hyperbolic_h2(), false),
    ] {
        for (k, x) in spec.sample_points().into_iter().enumerate() {
            let raw: Vec<f64> = (0..spec.dim)
                .map(|j| (0.8 * k as f64 + 1.1 * j as f64).cos() + 0.2)
                .collect();
            let v: Vec<f64> = unit(&spec, &x, &raw).iter().map(|a| 0.6 * a).collect();
            let r = leaf_holomorphicity_residual(&spec, &x, &v, &grid, STEPS)?;
            if is_flat {
                flat = flat.max(r);
            } else {
                curved = curved.max(r);
            }
        }
    }
    Ok(outcome(&[
        ("curved leaf residual", curved, 1e-6),
        ("flat leaf residual", flat, 1e-10),
    ]))
}

fn flat_model() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let spec = flat_euclidean(n);
        let jstd = standard_structure(n);
        for _ in 0..10 {
            let x = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v = (0..n).map(|_| rng.gen_range(-0.4..0.4)).collect();
            let j = adapted_j(&spec, &TangentPoint::new(x, v), STEPS)?.j;
            worst = worst.max((j - &jstd).amax());
        }
    }
    Ok(outcome(&[("max |J - J_std|", worst, 1e-12)]))
}

fn gluing() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut round: f64 = 0.0;
    let mut glue: f64 = 0.0;
    let mut real: f64 = 0.0;
    let mut grid = circle_grid(1.0, 8);
    grid.extend(circle_grid(0.7, 5));
    grid.push(c(0.0, 0.0));
    for entry in catalog::catalog() {
        let spec = &entry.spec;
        let n = spec.dim;
        for x in spec.sample_points() {
            let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dir = unit(spec, &x, &raw);
            let y: Vec<Complex64> = (0..n).map(|k| c(x[k], rng.gen_range(-0.05..0.05))).collect();
            let beta: Vec<Complex64> = (0..n).map(|k| c(0.1 * dir[k], rng.gen_range(-0.03..0.03))).collect();
            let zeta = Complex64::from_polar(rng.gen_range(0.6..1.6), rng.gen_range(0.0..std::f64::consts::TAU));
            let tp = TwistorPoint::new(Patch::Zero, y, beta, zeta);
            let back = transition_inverse(spec, &transition(spec, &tp, STEPS)?, STEPS)?;
            round = round.max(back.distance(&tp));
            let v: Vec<f64> = dir.iter().map(|a| 0.15 * a).collect();
            let s = point_section(spec, &TangentPoint::new(x, v), STEPS)?;
            let r = section_residuals(spec, &s, &grid, STEPS);
            glue = glue.max(r.gluing);
            real = real.max(r.reality);
        }
    }
    Ok(outcome(&[
        ("round trip", round, 1e-9),
        ("section gluing", glue, 1e-7),
        ("section reality", real, 1e-7),
    ]))
}

fn splitting() -> Result<Outcome> {
    let mut wrong = 0.0;
    let mut seen = Vec::new();
    for n in 1..=3 {
        let p = h0_profile(n)?;
        seen.push(format!("{:?}", p));
        if p != [4 * n, 2 * n, 0] {
            wrong += 1.0;
        }
    }
    let mut o = outcome(&[("profiles off (4n, 2n, 0)", wrong, 0.0)]);
    o.summary.push_str(&format!("; h0 = {}", seen.join(" ")));
    Ok(o)
}

fn near_identity(rng: &mut ChaCha8Rng) -> Moebius {
    let mut e = || c(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15));
    let a = c(1.0, 0.0) + e();
    let b = e();
    let cc = e();
    Moebius::new(a, b, cc, (c(1.0, 0.0) + b * cc) / a).expect("unit determinant")
}

fn group_actions() -> Result<Outcome> {
    let spec = sphere_s2();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut law: f64 = 0.0;
    let mut scalar: f64 = 0.0;
    for _ in 0..100 {
        let g1 = near_identity(&mut rng);
        let g2 = near_identity(&mut rng);
        let y = vec![
            c(1.57 + rng.gen_range(-0.3..0.3), rng.gen_range(-0.1..0.1)),
            c(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1)),
        ];
        let b = vec![
            c(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15)),
            c(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15)),
        ];
        let tp = TwistorPoint::new(Patch::Zero, y, b, c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
        let two = moebius_action(&spec, &g1, &moebius_action(&spec, &g2, &tp, STEPS)?, STEPS)?;
        let one = moebius_action(&spec, &g1.compose(&g2), &tp, STEPS)?;
        law = law.max(two.distance(&one));
        // Diagonal elements fix zeta = 0 and infinity and scale the fibre by (c zeta + d)^-2 = a^2.
        let a = Complex64::from_polar(rng.gen_range(0.8..1.2), rng.gen_range(0.0..std::f64::consts::TAU));
        let diag = Moebius::new(a, c(0.0, 0.0), c(0.0, 0.0), a.inv())?;
        let out = moebius_action(&spec, &diag, &tp, STEPS)?;
        for k in 0..2 {
            scalar = scalar
                .max((out.beta[k] - tp.beta[k] * a * a).norm())
                .max((out.y[k] - tp.y[k]).norm());
        }
    }
    let mut orbit: f64 = 0.0;
    for (x, v) in [([1.4, 0.0], [0.1, 0.15]), ([1.8, 0.5], [-0.12, 0.05])] {
        let s = point_section(&spec, &TangentPoint::new(x.to_vec(), v.to_vec()), STEPS)?;
        for _ in 0..4 {
            let axis = [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ];
            let g = Moebius::su2(axis, rng.gen_range(-0.6..0.6));
            orbit = orbit.max(rotated_reality_residual(&spec, &s, &g, &circle_grid(1.0, 8), STEPS)?);
        }
    }
    Ok(outcome(&[
        ("group law", law, 1e-8),
        ("fibre scalar", scalar, 1e-15),
        ("SU(2) orbit reality", orbit, 1e-7),
    ]))
}

fn flat_identity() -> Result<Outcome> {
    let spec = flat_torsion_group();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let p = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let v = [rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
        worst = worst.max(verify_flat_identity(&spec, &p, &v, DEFAULT_ORDER, STEPS)?);
    }
    Ok(outcome(&[("flat identity", worst, 1e-7)]))
}

fn nahm_pipeline() -> Result<Outcome> {
    let spec = flat_torsion_group();
    let config = NahmConfig::default();
    let x = [0.2, -0.1];
    let (v1, v2, v3) = ([0.05, 0.08], [0.1, -0.04], [-0.06, 0.09]);
    let init = NahmState::initial(&spec, &x, &v1, &v2, &v3, &config)?;
    let path = nahm_path(&init, 32)?;
    let reality = path_reality_residual(&path);
    let mut rh: f64 = 0.0;
    for zeta in circle_grid(1.0, 6).into_iter().chain([c(0.6, 0.0), c(0.0, 1.5)]) {
        rh = rh.max(riemann_hilbert_residual(
            &path,
            zeta,
            &to_complex(&x),
            &[16, 32, 48, 64],
            100,
        )?);
    }
    let zero = [0.0; 2];
    let s = nahm_section(&spec, &x, &v1, &zero, &zero, &config)?;
    let p = point_section(&spec, &TangentPoint::new(x.to_vec(), v1.to_vec()), STEPS)?;
    let mut degenerate: f64 = 0.0;
    for zeta in circle_grid(1.0, 6).into_iter().chain([c(0.0, 0.0), c(1.5, 0.0)]) {
        for patch in [Patch::Zero, Patch::Infinity] {
            degenerate = degenerate.max(s.eval(patch, zeta)?.distance(&p.eval(patch, zeta)?));
        }
    }
    let big = NahmState::initial(&spec, &x, &[0.5, 0.8], &[1.0, -0.4], &[-0.6, 0.9], &config)?;
    let order = nahm_convergence_order(&big, 4)?;
    let mut o = outcome(&[
        ("reality", reality, 1e-7),
        ("Riemann-Hilbert", rh, 1e-6),
        ("degenerate vs point section", degenerate, 1e-6),
        ("|order - 4|", (order - 4.0).abs(), 0.3),
    ]);
    o.summary.push_str(&format!("; observed order {:.3}", order));
    Ok(o)
}

fn ls_samples(spec: &ManifoldSpec, rng: &mut ChaCha8Rng, count: usize) -> Vec<LempertSzokeSample> {
    let pts = spec.sample_points();
    let n = spec.dim;
    (0..count)
        .map(|i| {
            let x = pts[i % pts.len()].clone();
            let v = (0..n).map(|_| rng.gen_range(-0.2..0.2)).collect();
            LempertSzokeSample {
                point: TangentPoint::new(x, v),
                a1: (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                a2: (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            }
        })
        .collect()
}

fn metric_layer() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sphere = sphere_s2();
    let ls_sphere = lempert_szoke_check(&sphere, &ls_samples(&sphere, &mut rng, 20), STEPS)?;
    let circ = circle();
    let ls_circle = lempert_szoke_check(&circ, &ls_samples(&circ, &mut rng, 20), STEPS)?;
    let mut recon: f64 = 0.0;
    for spec in [sphere_s2(), hyperbolic_h2(), flat_minkowski()] {
        for x in spec.sample_points() {
            recon = recon.max(omega_triple_at_x(&spec, &x)?.reconstruction_defect());
        }
    }
    let mut jac: f64 = 0.0;
    for _ in 0..10 {
        let x = [rng.gen_range(0.6..2.5), rng.gen_range(-1.0..1.0)];
        let v = [rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)];
        let u0: Vec<Complex64> = (0..2).map(|_| c(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let ud: Vec<Complex64> = (0..2).map(|_| c(rng.gen_range(-1.0..1.0), 0.0)).collect();
        jac = jac.max(jacobi_identity_check(&sphere, &x, &v, &u0, &ud, STEPS)?);
    }
    Ok(outcome(&[
        ("omega_1 - dTheta sphere", ls_sphere, 1e-5),
        ("omega_1 - dTheta circle", ls_circle, 1e-8),
        ("G reconstructions", recon, 1e-7),
        ("Jacobi identity", jac, 1e-6),
    ]))
}

fn signatures() -> Result<Outcome> {
    let got = [
        signature_at_x(&sphere_s2(), &[1.0, 0.3])?,
        signature_at_x(&flat_minkowski(), &[0.0, 0.0])?,
        signature_at_x(&flat_euclidean(1), &[0.0])?,
    ];
    let want = [(8, 0), (4, 4), (4, 0)];
    let wrong = got.iter().zip(&want).filter(|(a, b)| a != b).count() as f64;
    let mut o = outcome(&[("mismatched signatures", wrong, 0.0)]);
    o.summary.push_str(&format!(
        "; sphere {:?}, minkowski {:?}, line {:?}",
        got[0], got[1], got[2]
    ));
    Ok(o)
}

fn full_rank() -> Result<Outcome> {
    let config = NahmConfig {
        frame_steps: 8,
        ..NahmConfig::default()
    };
    let mut rank_defect = 0.0;
    let mut worst_ratio = f64::INFINITY;
    let mut notes = Vec::new();
    for (name, spec) in [
        ("plane", flat_euclidean(2)),
        ("group", flat_torsion_group()),
        ("line", flat_euclidean(1)),
    ] {
        let x = vec![0.2, -0.1][..spec.dim].to_vec();
        let r = section_family_rank(&spec, &x, &circle_grid(1.0, 4), 1e-5, &config)?;
        rank_defect += (r.expected as f64 - r.rank as f64).abs();
        worst_ratio = worst_ratio.min(r.ratio);
        notes.push(format!("{} {}/{}", name, r.rank, r.expected));
    }
    let mut o = outcome(&[
        ("rank deficit", rank_defect, 0.0),
        ("1 / (s_4n / s_1)", 1.0 / worst_ratio, 1e6),
    ]);
    o.summary.push_str(&format!("; {}", notes.join(", ")));
    Ok(o)
}

type Criterion = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion, f64); 10] = [
        ("adaptedness", adaptedness, 30.0),
        ("flat-model identity", flat_model, f64::INFINITY),
        ("twistor gluing", gluing, 60.0),
        ("normal-bundle splitting", splitting, 5.0),
        ("group actions", group_actions, f64::INFINITY),
        ("flat key identity", flat_identity, f64::INFINITY),
        ("Nahm pipeline", nahm_pipeline, 180.0),
        ("metric layer", metric_layer, f64::INFINITY),
        ("signature", signatures, f64::INFINITY),
        ("full-rank section family", full_rank, f64::INFINITY),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let (pass, summary) = match result {
            Ok(o) => (o.pass && secs <= *budget, o.summary),
            Err(e) => (false, format!("error: {}", e)),
        };
        let budget_note = if budget.is_finite() {
            format!(" (budget {:.0} s)", budget)
        } else {
            String::new()
        };
        println!(
            "[{}] {:>2} {}: {} [{:.2} s{}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            name,
            summary,
            secs,
            budget_note
        );
        if !pass {
            failures += 1;
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
