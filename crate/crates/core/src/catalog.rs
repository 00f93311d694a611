//! Built-in example manifolds.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{max_curvature, signature_of, ChartDomain, ManifoldSpec};
use crate::series::Expr;

/// Curvature threshold used by the flatness gate.
pub const FLATNESS_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogFlags {
    pub flat: bool,
    pub has_metric: bool,
    pub signature: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct ExampleCatalogEntry {
    pub name: &'static str,
    pub description: &'static str,
    pub spec: ManifoldSpec,
    pub flags: CatalogFlags,
}

impl ExampleCatalogEntry {
    /// Load-time gate: spec validation, flatness for flat-flagged entries and
    /// the declared signature at the chart center.
    pub fn check(&self) -> Result<()> {
        self.spec.validate()?;
        if self.flags.flat {
            let k = max_curvature(&self.spec)?;
            if k > FLATNESS_THRESHOLD {
                return Err(Error::NotFlat {
                    curvature: k,
                    threshold: FLATNESS_THRESHOLD,
                });
            }
        }
        if self.flags.has_metric != self.spec.has_metric() {
            return Err(Error::Config(format!(
                "{}: has_metric flag disagrees with spec",
                self.name
            )));
        }
        if let Some(sig) = self.flags.signature {
            let g = self.spec.metric_real(&self.spec.center())?;
            let got = signature_of(&g, 1e-10)?;
            if got != sig {
                return Err(Error::Config(format!(
                    "{}: signature {:?} at the center, declared {:?}",
                    self.name, got, sig
                )));
            }
        }
        Ok(())
    }
}

fn diag_metric(entries: Vec<Expr>) -> Vec<Vec<Expr>> {
    let n = entries.len();
    let mut g = vec![vec![Expr::c(0.0); n]; n];
    for (i, e) in entries.into_iter().enumerate() {
        g[i][i] = e;
    }
    g
}

fn with_metric(mut spec: ManifoldSpec, g: Vec<Vec<Expr>>, sig: (usize, usize)) -> ManifoldSpec {
    spec.metric = Some(g);
    spec.signature = Some(sig);
    spec
}

pub fn flat_euclidean(n: usize) -> ManifoldSpec {
    let spec = ManifoldSpec::from_christoffel(ManifoldSpec::zero_christoffel(n), ChartDomain::cube(n, 5.0));
    with_metric(spec, diag_metric(vec![Expr::c(1.0); n]), (n, 0))
}

pub fn flat_minkowski() -> ManifoldSpec {
    let spec = ManifoldSpec::from_christoffel(ManifoldSpec::zero_christoffel(2), ChartDomain::cube(2, 5.0));
    with_metric(spec, diag_metric(vec![Expr::c(1.0), Expr::c(-1.0)]), (1, 1))
}

pub fn circle() -> ManifoldSpec {
    let spec = ManifoldSpec::from_christoffel(
        ManifoldSpec::zero_christoffel(1),
        ChartDomain::new(vec![-2.0 * PI], vec![2.0 * PI]),
    );
    with_metric(spec, diag_metric(vec![Expr::c(1.0)]), (1, 0))
}

/// Unit sphere in geodesic polar coordinates `(r, phi)`, `ds^2 = dr^2 + sin^2 r dphi^2`.
pub fn sphere_s2() -> ManifoldSpec {
    let r = || Expr::var(0);
    let mut g = ManifoldSpec::zero_christoffel(2);
    g[0][1][1] = -(r().sin() * r().cos());
    g[1][0][1] = r().cos() / r().sin();
    g[1][1][0] = r().cos() / r().sin();
    let spec = ManifoldSpec::from_christoffel(g, ChartDomain::new(vec![0.2, -8.0], vec![PI - 0.2, 8.0]));
    with_metric(spec, diag_metric(vec![Expr::c(1.0), r().sin().powi(2)]), (2, 0))
}

/// Hyperbolic plane in geodesic polar coordinates, `ds^2 = dr^2 + sinh^2 r dphi^2`.
pub fn hyperbolic_h2() -> ManifoldSpec {
    let r = || Expr::var(0);
    let mut g = ManifoldSpec::zero_christoffel(2);
    g[0][1][1] = -(r().sinh() * r().cosh());
    g[1][0][1] = r().cosh() / r().sinh();
    g[1][1][0] = r().cosh() / r().sinh();
    let spec = ManifoldSpec::from_christoffel(g, ChartDomain::new(vec![0.2, -8.0], vec![4.0, 8.0]));
    with_metric(spec, diag_metric(vec![Expr::c(1.0), r().sinh().powi(2)]), (2, 0))
}

/// The group of affine maps `t -> e^a t + b` in coordinates `(a, b)` with
/// product `(a1, b1)(a2, b2) = (a1 + a2, b1 + e^{a1} b2)`, carrying the flat
/// connection for which left-invariant fields `d_a`, `e^a d_b` are parallel.
/// Its only nonzero symbol is `Gamma^b_{ab} = -1`, so it has torsion.
pub fn flat_torsion_group() -> ManifoldSpec {
    let mut g = ManifoldSpec::zero_christoffel(2);
    g[1][0][1] = Expr::c(-1.0);
    ManifoldSpec::from_christoffel(g, ChartDomain::cube(2, 3.0))
}

pub fn catalog() -> Vec<ExampleCatalogEntry> {
    let metric_flags = |flat: bool, sig: (usize, usize)| CatalogFlags {
        flat,
        has_metric: true,
        signature: Some(sig),
    };
    vec![
        ExampleCatalogEntry {
            name: "flat-euclidean-1",
            description: "Euclidean line",
            spec: flat_euclidean(1),
            flags: metric_flags(true, (1, 0)),
        },
        ExampleCatalogEntry {
            name: "flat-euclidean-2",
            description: "Euclidean plane",
            spec: flat_euclidean(2),
            flags: metric_flags(true, (2, 0)),
        },
        ExampleCatalogEntry {
            name: "flat-euclidean-3",
            description: "Euclidean 3-space",
            spec: flat_euclidean(3),
            flags: metric_flags(true, (3, 0)),
        },
        ExampleCatalogEntry {
            name: "flat-minkowski-11",
            description: "Minkowski plane diag(1, -1)",
            spec: flat_minkowski(),
            flags: metric_flags(true, (1, 1)),
        },
        ExampleCatalogEntry {
            name: "circle",
            description: "Circle with its angular chart",
            spec: circle(),
            flags: metric_flags(true, (1, 0)),
        },
        ExampleCatalogEntry {
            name: "sphere-s2",
            description: "Round unit 2-sphere, geodesic polar chart",
            spec: sphere_s2(),
            flags: metric_flags(false, (2, 0)),
        },
        ExampleCatalogEntry {
            name: "hyperbolic-h2",
            description: "Hyperbolic plane, geodesic polar chart",
            spec: hyperbolic_h2(),
            flags: metric_flags(false, (2, 0)),
        },
        ExampleCatalogEntry {
            name: "flat-torsion-group",
            description: "Affine group of the line with its flat left-invariant connection",
            spec: flat_torsion_group(),
            flags: CatalogFlags {
                flat: true,
                has_metric: false,
                signature: None,
            },
        },
    ]
}

pub fn lookup(name: &str) -> Result<ExampleCatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Config(format!("unknown example '{}'", name)))
}
