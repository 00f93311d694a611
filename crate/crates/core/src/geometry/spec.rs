use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Expr, Scalar};

pub const DEFAULT_TUBE_RADIUS: f64 = 0.5;
pub const DEFAULT_BLOWUP_BOUND: f64 = 1e6;

fn default_tube() -> f64 {
    DEFAULT_TUBE_RADIUS
}

fn default_blowup() -> f64 {
    DEFAULT_BLOWUP_BOUND
}

/// Axis-aligned box in the real chart where the real locus lives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        ChartDomain { lower, upper }
    }

    pub fn cube(n: usize, half_width: f64) -> Self {
        ChartDomain {
            lower: vec![-half_width; n],
            upper: vec![half_width; n],
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }
}

/// A real-analytic linear connection (and optional metric) on one chart.
///
/// `christoffel[k][i][j]` is the coefficient with `nabla_{d_i} d_j = Gamma^k_{ij} d_k`;
/// no symmetry in `i, j` is assumed. All constants are real, so complex
/// conjugation of chart coordinates is the real structure of the
/// complexified chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub dim: usize,
    pub christoffel: Vec<Vec<Vec<Expr>>>,
    #[serde(default)]
    pub metric: Option<Vec<Vec<Expr>>>,
    #[serde(default)]
    pub signature: Option<(usize, usize)>,
    pub chart_domain: ChartDomain,
    #[serde(default = "default_tube")]
    pub tube_radius: f64,
    #[serde(default = "default_blowup")]
    pub blowup_bound: f64,
}

/// Nonzero Christoffel entries, `(k, i, j, expr)`.
pub(crate) type GammaTerms<'a> = Vec<(usize, usize, usize, &'a Expr)>;

impl ManifoldSpec {
    /// A connection with the given symbols and no metric.
    pub fn from_christoffel(christoffel: Vec<Vec<Vec<Expr>>>, domain: ChartDomain) -> Self {
        ManifoldSpec {
            dim: christoffel.len(),
            christoffel,
            metric: None,
            signature: None,
            chart_domain: domain,
            tube_radius: DEFAULT_TUBE_RADIUS,
            blowup_bound: DEFAULT_BLOWUP_BOUND,
        }
    }

    pub fn zero_christoffel(n: usize) -> Vec<Vec<Vec<Expr>>> {
        vec![vec![vec![Expr::c(0.0); n]; n]; n]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ManifoldSpec =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("manifold spec: {}", e)))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifold spec serializes")
    }

    pub fn center(&self) -> Vec<f64> {
        self.chart_domain.center()
    }

    pub fn has_metric(&self) -> bool {
        self.metric.is_some()
    }

    /// Shape checks, real-chart sanity, metric symmetry and declared signature.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if self.christoffel.len() != n
            || self
                .christoffel
                .iter()
                .any(|m| m.len() != n || m.iter().any(|r| r.len() != n))
        {
            return Err(Error::Config(format!("christoffel array must be {0}x{0}x{0}", n)));
        }
        let d = &self.chart_domain;
        if d.lower.len() != n || d.upper.len() != n || d.lower.iter().zip(&d.upper).any(|(a, b)| a >= b) {
            return Err(Error::Config(
                "chart_domain must be a nonempty box of the chart dimension".into(),
            ));
        }
        if !(self.tube_radius > 0.0) {
            return Err(Error::Config("tube_radius must be positive".into()));
        }
        let exprs = self
            .christoffel
            .iter()
            .flatten()
            .flatten()
            .chain(self.metric.iter().flatten().flatten());
        for e in exprs {
            if e.arity() > n {
                return Err(Error::Config(format!(
                    "expression {} uses more than {} variables",
                    e, n
                )));
            }
        }
        if let Some(g) = &self.metric {
            if g.len() != n || g.iter().any(|r| r.len() != n) {
                return Err(Error::Config(format!("metric must be {0}x{0}", n)));
            }
            for x in self.sample_points() {
                let gm = self.metric_real(&x)?;
                let asym = (&gm - gm.transpose()).amax();
                if asym > 1e-12 * gm.amax().max(1.0) {
                    return Err(Error::Config(format!("metric is not symmetric at {:?}", x)));
                }
                if let Some(sig) = self.signature {
                    let counts = signature_of(&gm, 1e-10)?;
                    if counts != sig {
                        return Err(Error::Config(format!(
                            "metric signature {:?} at {:?} differs from declared {:?}",
                            counts, x, sig
                        )));
                    }
                }
            }
        } else if self.signature.is_some() {
            return Err(Error::Config("signature given without a metric".into()));
        }
        Ok(())
    }

    /// Deterministic sample of real chart points: the center and points a
    /// quarter of the way toward each face.
    pub fn sample_points(&self) -> Vec<Vec<f64>> {
        let c = self.center();
        let mut pts = vec![c.clone()];
        for k in 0..self.dim {
            for side in [-1.0, 1.0] {
                let mut p = c.clone();
                let half = 0.5 * (self.chart_domain.upper[k] - self.chart_domain.lower[k]);
                p[k] += side * 0.25 * half;
                pts.push(p);
            }
        }
        pts
    }

    pub(crate) fn gamma_terms(&self) -> GammaTerms<'_> {
        let mut out = Vec::new();
        for (k, mk) in self.christoffel.iter().enumerate() {
            for (i, row) in mk.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    if !e.is_zero() {
                        out.push((k, i, j, e));
                    }
                }
            }
        }
        out
    }

    pub fn is_flat_symbols(&self) -> bool {
        self.gamma_terms().is_empty()
    }

    /// `out^k = sum_{ij} Gamma^k_{ij}(y) a^i b^j`.
    pub fn gamma_contract<T: Scalar>(&self, y: &[T], a: &[T], b: &[T]) -> Result<Vec<T>> {
        gamma_contract_terms(&self.gamma_terms(), self.dim, y, a, b)
    }

    /// Christoffel symbols evaluated at `y`, as `[k][i][j]`.
    pub fn christoffel_at<T: Scalar>(&self, y: &[T]) -> Result<Vec<Vec<Vec<T>>>> {
        let zero = y[0].constant_like(Complex64::new(0.0, 0.0));
        let n = self.dim;
        let mut out = vec![vec![vec![zero; n]; n]; n];
        for (k, i, j, e) in self.gamma_terms() {
            out[k][i][j] = e.eval(y)?;
        }
        Ok(out)
    }

    /// Holomorphically extended metric at `y`.
    pub fn metric_at<T: Scalar>(&self, y: &[T]) -> Result<Vec<Vec<T>>> {
        let g = self.metric.as_ref().ok_or(Error::NoMetric)?;
        g.iter().map(|row| row.iter().map(|e| e.eval(y)).collect()).collect()
    }

    pub fn metric_complex(&self, y: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let g = self.metric_at(y)?;
        Ok(DMatrix::from_fn(self.dim, self.dim, |i, j| g[i][j]))
    }

    pub fn metric_real(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let z: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(self.metric_complex(&z)?.map(|c| c.re))
    }

    /// Complex bilinear pairing `g~_y(a, b)` (no conjugation).
    pub fn pairing(&self, y: &[Complex64], a: &[Complex64], b: &[Complex64]) -> Result<Complex64> {
        let g = self.metric_complex(y)?;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += g[(i, j)] * a[i] * b[j];
            }
        }
        Ok(s)
    }
}

pub(crate) fn gamma_contract_terms<T: Scalar>(
    terms: &GammaTerms<'_>,
    n: usize,
    y: &[T],
    a: &[T],
    b: &[T],
) -> Result<Vec<T>> {
    let zero = y[0].constant_like(Complex64::new(0.0, 0.0));
    let mut out = vec![zero; n];
    for &(k, i, j, e) in terms {
        let prod = a[i].clone() * b[j].clone();
        let term = match e.as_const() {
            Some(c) => prod.scale(Complex64::new(c, 0.0)),
            None => e.eval(y)? * prod,
        };
        out[k] = out[k].clone() + term;
    }
    Ok(out)
}

/// `(positive, negative)` eigenvalue counts of a symmetric matrix; eigenvalues
/// below `rel_floor * max|eigenvalue|` are an error.
pub fn signature_of(m: &DMatrix<f64>, rel_floor: f64) -> Result<(usize, usize)> {
    let sym = 0.5 * (m + m.transpose());
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    let mut pos = 0;
    let mut neg = 0;
    for &l in eig.eigenvalues.iter() {
        if l.abs() <= rel_floor * scale || scale == 0.0 {
            return Err(Error::Singular {
                what: "symmetric form (near-zero eigenvalue)".into(),
                condition: if l == 0.0 { f64::INFINITY } else { scale / l.abs() },
            });
        }
        if l > 0.0 {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    Ok((pos, neg))
}
