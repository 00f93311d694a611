//! Batch verification: resolves an example (catalog name or JSON spec), runs
//! the named suites and produces one [`Report`] per check.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adapted::{
    adapted_j, leaf_grid, leaf_holomorphicity_residual, nijenhuis_residual, standard_structure, TangentPoint,
    NIJENHUIS_STEP,
};
use crate::catalog::{self, CatalogFlags, FLATNESS_THRESHOLD};
use crate::error::{Error, Result};
use crate::geometry::{max_curvature, signature_of, to_complex, ManifoldSpec, DEFAULT_STEPS};
use crate::metric::{
    jacobi_identity_check, lempert_szoke_check, omega_triple_at_x, signature_at_x, LempertSzokeSample,
};
use crate::nahm::{
    flatness_gate, nahm_convergence_order, nahm_path, nahm_section, path_reality_residual, riemann_hilbert_residual,
    section_family_rank, verify_flat_identity, NahmConfig, NahmState, DEFAULT_ORDER,
};
use crate::twistor::{
    circle_grid, h0_profile, moebius_action, point_section, rotated_reality_residual, section_residuals, transition,
    transition_inverse, Moebius, Patch, TwistorPoint,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Adapted,
    Twistor,
    Nahm,
    Metric,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["adapted", "twistor", "nahm", "metric", "all"];

    pub fn parse(name: &str) -> Result<Suite> {
        match name {
            "adapted" => Ok(Suite::Adapted),
            "twistor" => Ok(Suite::Twistor),
            "nahm" => Ok(Suite::Nahm),
            "metric" => Ok(Suite::Metric),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!(
                "unknown suite '{}' (expected one of {})",
                other,
                Suite::NAMES.join(", ")
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        Suite::NAMES[self as usize]
    }
}

/// Numerical knobs; every field is echoed into each report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Jet order for parallel fields.
    pub order: usize,
    /// RK4 steps for geodesic flows.
    pub steps: usize,
    /// Overrides the spec's tube radius when set.
    pub tube: Option<f64>,
    /// Multiplies every tolerance.
    pub tol_scale: f64,
    /// Frame RK4 steps for Nahm sections.
    pub frame_steps: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            order: DEFAULT_ORDER,
            steps: DEFAULT_STEPS,
            tube: None,
            tol_scale: 1.0,
            frame_steps: 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub order: usize,
    pub steps: usize,
    pub frame_steps: usize,
    pub tube_radius: f64,
    pub tol_scale: f64,
}

/// One check. `pass` holds iff `residual <= tolerance`; a check that could not
/// be evaluated has no residual and fails. Wall-clock time is isolated in
/// `timing` so the rest of the object is reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub case: String,
    pub suite: String,
    pub example: String,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub config: ConfigEcho,
    pub timing: f64,
}

impl Report {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// A resolved example.
#[derive(Clone, Debug)]
pub struct Target {
    pub name: String,
    pub spec: ManifoldSpec,
    pub flags: CatalogFlags,
}

/// Loads a catalog entry or, when `spec_path` is given, a JSON spec (named
/// `example` if provided, otherwise by the file stem). Both pass their gates.
pub fn resolve_target(example: Option<&str>, spec_path: Option<&Path>) -> Result<Target> {
    match spec_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {}", path.display(), e)))?;
            let spec = ManifoldSpec::from_json(&text)?;
            spec.validate()?;
            let flat = max_curvature(&spec)? <= FLATNESS_THRESHOLD;
            let name = example
                .map(str::to_string)
                .or_else(|| path.file_stem().map(|s| s.to_string_lossy().into_owned()))
                .unwrap_or_else(|| "spec".into());
            let flags = CatalogFlags {
                flat,
                has_metric: spec.has_metric(),
                signature: spec.signature,
            };
            Ok(Target { name, spec, flags })
        }
        None => {
            let name = example.ok_or_else(|| Error::Config("either --example or --spec is required".into()))?;
            let entry = catalog::lookup(name)?;
            entry.check()?;
            Ok(Target {
                name: entry.name.to_string(),
                spec: entry.spec,
                flags: entry.flags,
            })
        }
    }
}

type CheckFn<'a> = Box<dyn Fn() -> Result<(f64, Option<String>)> + Send + Sync + 'a>;

struct Check<'a> {
    case: String,
    tolerance: f64,
    run: CheckFn<'a>,
}

fn check<'a, F>(case: &str, tolerance: f64, run: F) -> Check<'a>
where
    F: Fn() -> Result<(f64, Option<String>)> + Send + Sync + 'a,
{
    Check {
        case: case.to_string(),
        tolerance,
        run: Box::new(run),
    }
}

/// Direction with unit length in a definite metric at `x` (Euclidean length
/// otherwise), deterministic in `k`.
fn direction(spec: &ManifoldSpec, x: &[f64], k: usize) -> Vec<f64> {
    let n = spec.dim;
    let raw: Vec<f64> = (0..n).map(|j| (1.3 * k as f64 + 0.7 * j as f64 + 0.4).cos()).collect();
    let euclid: f64 = raw.iter().map(|a| a * a).sum();
    let len2 = match spec.metric_real(x) {
        Ok(g) if matches!(signature_of(&g, 1e-10), Ok((p, q)) if p == 0 || q == 0) => {
            let v = nalgebra::DVector::from_column_slice(&raw);
            v.dot(&(g * &v)).abs()
        }
        _ => euclid,
    };
    let len = if len2 > 1e-12 { len2.sqrt() } else { 1.0 };
    raw.iter().map(|a| a / len).collect()
}

fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|a| a * s).collect()
}

fn adapted_checks<'a>(spec: &'a ManifoldSpec, cfg: &RunConfig) -> Vec<Check<'a>> {
    let steps = cfg.steps;
    let flat_symbols = spec.is_flat_symbols();
    let tangent_points = move || -> Vec<TangentPoint> {
        spec.sample_points()
            .into_iter()
            .enumerate()
            .map(|(k, x)| {
                let v = scaled(&direction(spec, &x, k), 0.15);
                TangentPoint::new(x, v)
            })
            .collect()
    };
    let mut out = vec![
        check("adapted/j-square", 1e-9, move || {
            let mut worst: f64 = 0.0;
            for p in tangent_points() {
                worst = worst.max(adapted_j(spec, &p, steps)?.square_defect());
            }
            Ok((worst, None))
        }),
        check(
            "adapted/leaf-holomorphicity",
            if flat_symbols { 1e-10 } else { 1e-6 },
            move || {
                let grid = leaf_grid(1.0, 0.3, 5, 3);
                let mut worst: f64 = 0.0;
                for (k, x) in spec.sample_points().into_iter().enumerate() {
                    let v = scaled(&direction(spec, &x, k), 0.6);
                    worst = worst.max(leaf_holomorphicity_residual(spec, &x, &v, &grid, steps)?);
                }
                Ok((worst, None))
            },
        ),
        check("adapted/nijenhuis", 1e-5, move || {
            let p = tangent_points().swap_remove(0);
            Ok((nijenhuis_residual(spec, &p, NIJENHUIS_STEP, steps)?, None))
        }),
    ];
    if flat_symbols {
        out.push(check("adapted/standard-structure", 1e-12, move || {
            let jstd = standard_structure(spec.dim);
            let mut worst: f64 = 0.0;
            for p in tangent_points() {
                worst = worst.max((adapted_j(spec, &p, steps)?.j - &jstd).amax());
            }
            Ok((worst, None))
        }));
    }
    out
}

/// Deterministic group elements with entries within 0.15 of the identity.
pub fn near_identity_moebius(k: usize) -> Moebius {
    let t = k as f64;
    let a = ONE + Complex64::from_polar(0.1, 0.9 * t + 0.3);
    let b = Complex64::from_polar(0.12, 1.7 * t + 1.1);
    let c = Complex64::from_polar(0.1, 2.3 * t + 0.5);
    Moebius::new(a, b, c, (ONE + b * c) / a).expect("unit determinant by construction")
}

fn twistor_checks<'a>(spec: &'a ManifoldSpec, cfg: &RunConfig) -> Vec<Check<'a>> {
    let steps = cfg.steps;
    let n = spec.dim;
    let fibre_points = move || -> Vec<TwistorPoint> {
        let mut pts = Vec::new();
        for (k, x) in spec.sample_points().into_iter().enumerate() {
            let d = direction(spec, &x, k);
            let e = direction(spec, &x, k + 3);
            let y: Vec<Complex64> = (0..n).map(|j| Complex64::new(x[j], 0.05 * e[j])).collect();
            let beta: Vec<Complex64> = (0..n).map(|j| Complex64::new(0.1 * d[j], -0.05 * e[j])).collect();
            for zeta in circle_grid(1.0, 3).into_iter().chain([Complex64::new(0.8, 0.3)]) {
                pts.push(TwistorPoint::new(Patch::Zero, y.clone(), beta.clone(), zeta));
            }
        }
        pts
    };
    let sections = move || -> Result<Vec<crate::twistor::Section>> {
        spec.sample_points()
            .into_iter()
            .enumerate()
            .map(|(k, x)| {
                let v = scaled(&direction(spec, &x, k), 0.15);
                point_section(spec, &TangentPoint::new(x, v), steps)
            })
            .collect()
    };
    let section_grid = || {
        let mut g = circle_grid(1.0, 8);
        g.extend(circle_grid(0.7, 5));
        g.push(ZERO);
        g
    };
    vec![
        check("twistor/round-trip", 1e-9, move || {
            let mut worst: f64 = 0.0;
            for tp in fibre_points() {
                let back = transition_inverse(spec, &transition(spec, &tp, steps)?, steps)?;
                worst = worst.max(back.distance(&tp));
            }
            Ok((worst, None))
        }),
        check("twistor/point-section-gluing", 1e-7, move || {
            let mut worst: f64 = 0.0;
            for s in sections()? {
                worst = worst.max(section_residuals(spec, &s, &section_grid(), steps).gluing);
            }
            Ok((worst, None))
        }),
        check("twistor/point-section-reality", 1e-7, move || {
            let mut worst: f64 = 0.0;
            for s in sections()? {
                worst = worst.max(section_residuals(spec, &s, &section_grid(), steps).reality);
            }
            Ok((worst, None))
        }),
        check("twistor/moebius-group-law", 1e-8, move || {
            let pts = fibre_points();
            let mut worst: f64 = 0.0;
            for k in 0..20 {
                let g1 = near_identity_moebius(2 * k);
                let g2 = near_identity_moebius(2 * k + 1);
                let mut tp = pts[k % pts.len()].clone();
                tp.zeta *= 0.6;
                let two = moebius_action(spec, &g1, &moebius_action(spec, &g2, &tp, steps)?, steps)?;
                let one = moebius_action(spec, &g1.compose(&g2), &tp, steps)?;
                worst = worst.max(two.distance(&one));
            }
            Ok((worst, None))
        }),
        check("twistor/moebius-fibre-scalar", 1e-14, move || {
            let mut worst: f64 = 0.0;
            for (k, tp) in fibre_points().iter().enumerate() {
                let a = Complex64::from_polar(1.2, 0.4 * k as f64);
                let g = Moebius::new(a, ZERO, ZERO, a.inv())?;
                let out = moebius_action(spec, &g, tp, steps)?;
                let scale = a * a;
                for j in 0..n {
                    worst = worst.max((out.beta[j] - tp.beta[j] * scale).norm());
                    worst = worst.max((out.y[j] - tp.y[j]).norm());
                }
            }
            Ok((worst, None))
        }),
        check("twistor/su2-reality", 1e-7, move || {
            let x = spec.center();
            let v = scaled(&direction(spec, &x, 0), 0.15);
            let s = point_section(spec, &TangentPoint::new(x, v), steps)?;
            let mut worst: f64 = 0.0;
            for (axis, theta) in [([1.0, 0.0, 0.0], 0.3), ([0.2, 0.5, -0.4], 0.25), ([0.0, 0.0, 1.0], 1.0)] {
                let g = Moebius::su2(axis, theta);
                worst = worst.max(rotated_reality_residual(spec, &s, &g, &circle_grid(1.0, 8), steps)?);
            }
            Ok((worst, None))
        }),
        check("twistor/normal-bundle-h0", 0.0, move || {
            let got = h0_profile(n)?;
            let want = [4 * n, 2 * n, 0];
            let r = if got == want { 0.0 } else { 1.0 };
            Ok((r, Some(format!("h0 for twists (0, -1, -2): {:?}", got))))
        }),
    ]
}

fn nahm_checks<'a>(spec: &'a ManifoldSpec, cfg: &RunConfig) -> Vec<Check<'a>> {
    let n = spec.dim;
    let config = NahmConfig {
        order: cfg.order,
        frame_steps: cfg.frame_steps,
        geodesic_steps: cfg.steps,
        ..NahmConfig::default()
    };
    let steps = cfg.steps;
    let x = spec.center();
    let data = move |s: f64| -> [Vec<f64>; 3] {
        let x = spec.center();
        [
            scaled(&direction(spec, &x, 1), 0.08 * s),
            scaled(&direction(spec, &x, 2), 0.1 * s),
            scaled(&direction(spec, &x, 4), 0.09 * s),
        ]
    };
    let x1 = x.clone();
    let x2 = x.clone();
    let x3 = x.clone();
    let x4 = x.clone();
    let x5 = x.clone();
    let x6 = x.clone();
    let x7 = x;
    vec![
        check("nahm/flat-identity", 1e-7, move || {
            let mut worst: f64 = 0.0;
            for (k, p) in spec.sample_points().into_iter().enumerate() {
                let v = scaled(&direction(spec, &p, k), 0.2);
                worst = worst.max(verify_flat_identity(spec, &p, &v, config.order, steps)?);
            }
            Ok((worst, None))
        }),
        check("nahm/reality", 1e-7, move || {
            let [v1, v2, v3] = data(1.0);
            let init = NahmState::initial(spec, &x1, &v1, &v2, &v3, &config)?;
            Ok((path_reality_residual(&nahm_path(&init, config.frame_steps)?), None))
        }),
        check("nahm/riemann-hilbert", 1e-6, move || {
            let [v1, v2, v3] = data(1.0);
            let init = NahmState::initial(spec, &x2, &v1, &v2, &v3, &config)?;
            let fs = config.frame_steps;
            let path = nahm_path(&init, fs)?;
            let mut worst: f64 = 0.0;
            for zeta in circle_grid(1.0, 4).into_iter().chain([Complex64::new(0.6, 0.0)]) {
                let r = riemann_hilbert_residual(&path, zeta, &to_complex(&x2), &[fs, 2 * fs], config.flow_steps)?;
                worst = worst.max(r);
            }
            Ok((worst, None))
        }),
        check("nahm/degenerate-section", 1e-6, move || {
            let [v1, _, _] = data(1.0);
            let zero = vec![0.0; n];
            let s = nahm_section(spec, &x3, &v1, &zero, &zero, &config)?;
            let p = point_section(spec, &TangentPoint::new(x3.clone(), v1.clone()), steps)?;
            let mut worst: f64 = 0.0;
            for zeta in circle_grid(1.0, 6).into_iter().chain([ZERO, Complex64::new(1.5, 0.0)]) {
                for patch in [Patch::Zero, Patch::Infinity] {
                    worst = worst.max(s.eval(patch, zeta)?.distance(&p.eval(patch, zeta)?));
                }
            }
            Ok((worst, None))
        }),
        check("nahm/section-gluing", 1e-6, move || {
            let [v1, v2, v3] = data(1.0);
            let s = nahm_section(spec, &x4, &v1, &v2, &v3, &config)?;
            Ok((section_residuals(spec, &s, &nahm_grid(), steps).gluing, None))
        }),
        check("nahm/section-reality", 1e-6, move || {
            let [v1, v2, v3] = data(1.0);
            let s = nahm_section(spec, &x5, &v1, &v2, &v3, &config)?;
            Ok((section_residuals(spec, &s, &nahm_grid(), steps).reality, None))
        }),
        check("nahm/convergence-order", 0.3, move || {
            let [v1, v2, v3] = data(8.0);
            let init = NahmState::initial(spec, &x6, &v1, &v2, &v3, &config)?;
            let end = crate::nahm::nahm_solve(&init, &[1.0], 1)?;
            if end[0].distance(&init) < 1e-14 {
                return Ok((0.0, Some("stationary data: the integrator is exact".into())));
            }
            let order = nahm_convergence_order(&init, 4)?;
            Ok(((order - 4.0).abs(), Some(format!("observed order {:.4}", order))))
        }),
        check("nahm/section-family-rank", 0.0, move || {
            let rank_config = NahmConfig {
                frame_steps: 8,
                ..config
            };
            let r = section_family_rank(spec, &x7, &circle_grid(1.0, 4), 1e-5, &rank_config)?;
            let ok = r.rank == r.expected && r.ratio > 1e-6;
            Ok((
                if ok { 0.0 } else { 1.0 },
                Some(format!(
                    "rank {} of {}, s_min / s_max = {:.3e}",
                    r.rank, r.expected, r.ratio
                )),
            ))
        }),
    ]
}

fn nahm_grid() -> Vec<Complex64> {
    let mut g = circle_grid(1.0, 16);
    g.extend([
        Complex64::new(0.6, 0.0),
        Complex64::new(1.5, 0.0),
        Complex64::new(0.0, 0.6),
        Complex64::new(0.0, 1.5),
    ]);
    g
}

fn metric_checks<'a>(spec: &'a ManifoldSpec, cfg: &RunConfig) -> Vec<Check<'a>> {
    let steps = cfg.steps;
    let n = spec.dim;
    let triples = move || -> Result<Vec<crate::metric::FormTriple>> {
        spec.sample_points()
            .iter()
            .map(|x| omega_triple_at_x(spec, x))
            .collect()
    };
    vec![
        check("metric/signature", 0.0, move || {
            let x = spec.center();
            let (p, q) = signature_of(&spec.metric_real(&x)?, 1e-10)?;
            let got = signature_at_x(spec, &x)?;
            let r = if got == (4 * p, 4 * q) { 0.0 } else { 1.0 };
            Ok((r, Some(format!("signature ({}, {})", got.0, got.1))))
        }),
        check("metric/form-fit", 1e-9, move || {
            let t = triples()?;
            Ok((
                t.iter()
                    .map(|t| t.fit_residual.max(t.reality_defect))
                    .fold(0.0, f64::max),
                None,
            ))
        }),
        check("metric/reconstruction", 1e-7, move || {
            Ok((
                triples()?.iter().map(|t| t.reconstruction_defect()).fold(0.0, f64::max),
                None,
            ))
        }),
        check("metric/base-block", 1e-6, move || {
            let mut worst: f64 = 0.0;
            for t in triples()? {
                worst = worst.max((t.base_block() - spec.metric_real(&t.x)?).amax());
            }
            Ok((worst, None))
        }),
        check("metric/block-orthogonality", 1e-9, move || {
            Ok((
                triples()?
                    .iter()
                    .map(|t| t.block_orthogonality_defect())
                    .fold(0.0, f64::max),
                None,
            ))
        }),
        check("metric/lempert-szoke", 1e-5, move || {
            let samples: Vec<LempertSzokeSample> = spec
                .sample_points()
                .into_iter()
                .enumerate()
                .map(|(k, x)| {
                    let v = scaled(&direction(spec, &x, k), 0.2);
                    let a1 = (0..2 * n).map(|j| (0.9 * j as f64 + 0.3 * k as f64).sin()).collect();
                    let a2 = (0..2 * n)
                        .map(|j| (1.7 * j as f64 + 0.5 * k as f64 + 1.0).cos())
                        .collect();
                    LempertSzokeSample {
                        point: TangentPoint::new(x, v),
                        a1,
                        a2,
                    }
                })
                .collect();
            Ok((lempert_szoke_check(spec, &samples, steps)?, None))
        }),
        check("metric/jacobi-identity", 1e-6, move || {
            let mut worst: f64 = 0.0;
            for (k, x) in spec.sample_points().into_iter().enumerate() {
                let v = scaled(&direction(spec, &x, k), 0.3);
                let u0 = to_complex(&direction(spec, &x, k + 1));
                let ud = to_complex(&scaled(&direction(spec, &x, k + 2), 0.5));
                worst = worst.max(jacobi_identity_check(spec, &x, &v, &u0, &ud, steps)?);
            }
            Ok((worst, None))
        }),
    ]
}

/// Runs `suite` on `target`. A suite that does not apply to the example
/// (Nahm on a curved connection, metric without a metric) is an error when
/// requested explicitly and skipped under `all`.
pub fn run_suite(suite: Suite, target: &Target, config: &RunConfig) -> Result<Vec<Report>> {
    let mut spec = target.spec.clone();
    if let Some(t) = config.tube {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("tube radius must be positive, got {}", t)));
        }
        spec.tube_radius = t;
    }
    if !(config.tol_scale > 0.0 && config.tol_scale.is_finite()) {
        return Err(Error::Config(format!(
            "tolerance scale must be positive, got {}",
            config.tol_scale
        )));
    }
    if config.steps == 0 || config.order == 0 || config.frame_steps == 0 {
        return Err(Error::Config("order, steps and frame steps must be positive".into()));
    }
    let spec = &spec;
    let mut suites: Vec<(Suite, Vec<Check<'_>>)> = Vec::new();
    let explicit = suite != Suite::All;
    if matches!(suite, Suite::Adapted | Suite::All) {
        suites.push((Suite::Adapted, adapted_checks(spec, config)));
    }
    if matches!(suite, Suite::Twistor | Suite::All) {
        suites.push((Suite::Twistor, twistor_checks(spec, config)));
    }
    if matches!(suite, Suite::Nahm | Suite::All) {
        match flatness_gate(spec) {
            Ok(()) => suites.push((Suite::Nahm, nahm_checks(spec, config))),
            Err(e) if explicit => return Err(e),
            Err(_) => {}
        }
    }
    if matches!(suite, Suite::Metric | Suite::All) {
        if spec.has_metric() {
            suites.push((Suite::Metric, metric_checks(spec, config)));
        } else if explicit {
            return Err(Error::NoMetric);
        }
    }
    let echo = ConfigEcho {
        order: config.order,
        steps: config.steps,
        frame_steps: config.frame_steps,
        tube_radius: spec.tube_radius,
        tol_scale: config.tol_scale,
    };
    let jobs: Vec<(Suite, Check<'_>)> = suites
        .into_iter()
        .flat_map(|(s, checks)| checks.into_iter().map(move |c| (s, c)))
        .collect();
    let mut reports: Vec<Report> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(s, c)| {
                scope.spawn(move || {
                    let start = Instant::now();
                    let outcome = (c.run)();
                    let timing = start.elapsed().as_secs_f64();
                    let tolerance = c.tolerance * config.tol_scale;
                    let (residual, detail) = match outcome {
                        Ok((r, d)) if r.is_finite() => (Some(r), d),
                        Ok((r, d)) => (None, Some(d.unwrap_or_else(|| format!("residual {}", r)))),
                        Err(e) => (None, Some(e.to_string())),
                    };
                    Report {
                        case: c.case.clone(),
                        suite: s.name().to_string(),
                        example: target.name.clone(),
                        residual,
                        tolerance,
                        pass: residual.is_some_and(|r| r <= tolerance),
                        detail,
                        config: echo,
                        timing,
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("check thread panicked"))
            .collect()
    });
    reports.sort_by(|a, b| a.case.cmp(&b.case));
    Ok(reports)
}

/// 0 when every report passes, 1 otherwise.
pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().all(|r| r.pass) {
        0
    } else {
        1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogListing {
    pub name: String,
    pub description: String,
    pub dim: usize,
    pub flags: CatalogFlags,
}

pub fn list_catalog() -> Vec<CatalogListing> {
    catalog::catalog()
        .into_iter()
        .map(|e| CatalogListing {
            name: e.name.to_string(),
            description: e.description.to_string(),
            dim: e.spec.dim,
            flags: e.flags,
        })
        .collect()
}
