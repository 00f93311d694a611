//! The adapted complex structure on `TX`, pulled back from the
//! complexification through `(x, v) -> exp^C_x(i v)`.
//!
//! Tangent vectors to `TX` are written in chart coordinates `(dx, dv)`, so
//! every matrix here is `2n x 2n` with the `dx` block first.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{exp_c, exp_c_differential, geodesic_flow, to_complex, ManifoldSpec, PhaseState};

/// Condition number above which `dPhi` is treated as singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Default finite-difference step of the Nijenhuis check.
pub const NIJENHUIS_STEP: f64 = 1e-4;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentPoint {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl TangentPoint {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        TangentPoint { x, v }
    }

    fn check(&self, spec: &ManifoldSpec) -> Result<()> {
        if self.x.len() != spec.dim || self.v.len() != spec.dim {
            return Err(Error::Structure(format!(
                "tangent point has lengths ({}, {}), dimension is {}",
                self.x.len(),
                self.v.len(),
                spec.dim
            )));
        }
        if !spec.chart_domain.contains(&self.x) {
            return Err(Error::DomainExit {
                fraction: 0.0,
                detail: format!("base point {:?} outside the chart domain", self.x),
            });
        }
        Ok(())
    }
}

/// The adapted structure at one point of `TX`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmostComplexValue {
    pub base: TangentPoint,
    pub j: DMatrix<f64>,
}

impl AlmostComplexValue {
    /// `max |J^2 + I|`.
    pub fn square_defect(&self) -> f64 {
        let m = self.j.nrows();
        (&self.j * &self.j + DMatrix::identity(m, m)).amax()
    }
}

/// Differential of the real involution at a real point: coordinate conjugation.
pub fn tau_star(w: &[Complex64]) -> Vec<Complex64> {
    w.iter().map(|c| c.conj()).collect()
}

/// `Phi(x, v) = exp^C_x(i v)`.
pub fn embed_v_minus(spec: &ManifoldSpec, p: &TangentPoint, steps: usize) -> Result<Vec<Complex64>> {
    p.check(spec)?;
    let iv: Vec<Complex64> = p.v.iter().map(|&a| I * a).collect();
    exp_c(spec, &to_complex(&p.x), &iv, Complex64::new(1.0, 0.0), steps)
}

/// Complex `n x 2n` differential of `Phi`, columns `(dx, dv)`.
pub fn embed_differential(spec: &ManifoldSpec, p: &TangentPoint, steps: usize) -> Result<DMatrix<Complex64>> {
    p.check(spec)?;
    let n = spec.dim;
    let iv: Vec<Complex64> = p.v.iter().map(|&a| I * a).collect();
    let mut e = exp_c_differential(spec, &to_complex(&p.x), &iv, Complex64::new(1.0, 0.0), steps)?.exp_block();
    for c in n..2 * n {
        for r in 0..n {
            e[(r, c)] *= I;
        }
    }
    Ok(e)
}

/// `dPhi` as a real `2n x 2n` map `(dx, dv) -> (Re dPhi, Im dPhi)`.
pub fn real_form(d: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = d.nrows();
    DMatrix::from_fn(
        2 * n,
        d.ncols(),
        |r, c| if r < n { d[(r, c)].re } else { d[(r - n, c)].im },
    )
}

/// Multiplication by `i` on `(Re, Im)` pairs.
pub fn standard_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, n + k)] = -1.0;
        j[(n + k, k)] = 1.0;
    }
    j
}

pub fn adapted_j(spec: &ManifoldSpec, p: &TangentPoint, steps: usize) -> Result<AlmostComplexValue> {
    let n = spec.dim;
    let d = real_form(&embed_differential(spec, p, steps)?);
    let sv = d.clone().svd(false, false).singular_values;
    let cond = if sv.min() == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / sv.min()
    };
    if cond > SINGULAR_CONDITION {
        return Err(Error::Singular {
            what: "embedding differential".into(),
            condition: cond,
        });
    }
    let rhs = standard_structure(n) * &d;
    let j = d.lu().solve(&rhs).ok_or_else(|| Error::Singular {
        what: "embedding differential".into(),
        condition: f64::INFINITY,
    })?;
    Ok(AlmostComplexValue { base: p.clone(), j })
}

/// Rectangular `(p, q)` grid over `[-p_max, p_max] x [-q_max, q_max]`.
pub fn leaf_grid(p_max: f64, q_max: f64, np: usize, nq: usize) -> Vec<(f64, f64)> {
    let lin = |m: f64, k: usize| -> Vec<f64> {
        if k <= 1 {
            vec![0.0]
        } else {
            (0..k).map(|i| -m + 2.0 * m * i as f64 / (k - 1) as f64).collect()
        }
    };
    let ps = lin(p_max, np);
    let qs = lin(q_max, nq);
    ps.iter().flat_map(|&p| qs.iter().map(move |&q| (p, q))).collect()
}

/// Cauchy-Riemann defect of the leaf `(p, q) -> (gamma(p), q gamma'(p))`
/// where `gamma` is the real geodesic with `gamma(0) = x`, `gamma'(0) = v`:
/// the maximum over the grid of `|J dF(d_p) - dF(d_q)|`.
pub fn leaf_holomorphicity_residual(
    spec: &ManifoldSpec,
    x: &[f64],
    v: &[f64],
    grid: &[(f64, f64)],
    steps: usize,
) -> Result<f64> {
    let n = spec.dim;
    let start = PhaseState::real(x, v);
    let mut worst: f64 = 0.0;
    for &(p, q) in grid {
        let st = geodesic_flow(spec, &start, Complex64::new(p, 0.0), steps)?;
        let gp: Vec<f64> = st.y.iter().map(|c| c.re).collect();
        let gv: Vec<f64> = st.beta.iter().map(|c| c.re).collect();
        let accel = spec.gamma_contract(&st.y, &st.beta, &st.beta)?;
        let base = TangentPoint::new(gp, gv.iter().map(|a| q * a).collect());
        let jv = adapted_j(spec, &base, steps)?;
        let dp = DVector::from_fn(2 * n, |r, _| if r < n { gv[r] } else { -q * accel[r - n].re });
        let dq = DVector::from_fn(2 * n, |r, _| if r < n { 0.0 } else { gv[r - n] });
        worst = worst.max((&jv.j * dp - dq).amax());
    }
    Ok(worst)
}

/// First derivatives of the adapted `J` along each of the `2n` coordinates,
/// by Richardson-extrapolated central differences.
fn j_derivatives(spec: &ManifoldSpec, p: &TangentPoint, h: f64, steps: usize) -> Result<Vec<DMatrix<f64>>> {
    let n = spec.dim;
    let shifted = |axis: usize, delta: f64| -> Result<DMatrix<f64>> {
        let mut q = p.clone();
        if axis < n {
            q.x[axis] += delta;
        } else {
            q.v[axis - n] += delta;
        }
        Ok(adapted_j(spec, &q, steps)?.j)
    };
    (0..2 * n)
        .map(|axis| {
            let central = |step: f64| -> Result<DMatrix<f64>> {
                Ok((shifted(axis, step)? - shifted(axis, -step)?) / (2.0 * step))
            };
            let coarse = central(h)?;
            let fine = central(0.5 * h)?;
            Ok((fine * 4.0 - coarse) / 3.0)
        })
        .collect()
}

/// Largest component of the Nijenhuis tensor of the adapted `J` at `p`.
pub fn nijenhuis_residual(spec: &ManifoldSpec, p: &TangentPoint, h: f64, steps: usize) -> Result<f64> {
    let m = 2 * spec.dim;
    let j = adapted_j(spec, p, steps)?.j;
    let dj = j_derivatives(spec, p, h, steps)?;
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in 0..m {
            for k in 0..m {
                let mut s = 0.0;
                for l in 0..m {
                    s += j[(l, a)] * dj[l][(k, b)] - j[(l, b)] * dj[l][(k, a)];
                    s -= j[(k, l)] * (dj[a][(l, b)] - dj[b][(l, a)]);
                }
                worst = worst.max(s.abs());
            }
        }
    }
    Ok(worst)
}
