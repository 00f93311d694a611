//! The metric layer: the canonical 1-form on `TX`, its fibrewise holomorphic
//! extension, the quadratic family of 2-forms on section variations, the
//! extracted triple `omega_1, omega_2, omega_3`, and the induced metric `G`.
//!
//! At `x` in `X` the variation space is the `4n`-dimensional space of real
//! sections of the normal bundle, parametrized by `(X, V1, V2, V3)`:
//!
//! `dy(zeta) = (X + i V1) + (V2 - i V3) zeta`,
//! `dbeta(zeta) = (V2 + i V3) + 2 i V1 zeta + (V2 - i V3) zeta^2`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adapted::TangentPoint;
use crate::error::{Error, Result};
use crate::geometry::{exp_c_differential, jacobi_field, signature_of, to_complex, ManifoldSpec};
use crate::series::Jet;
use crate::twistor::TwistorPoint;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Finite-difference step for the exterior derivative of the canonical form.
pub const D_THETA_STEP: f64 = 1e-4;

/// Twistor-line parameters whose evaluation maps define `J_1, J_2, J_3`.
pub const J_ZETAS: [Complex64; 3] = [ZERO, I, Complex64::new(-1.0, 0.0)];

/// Default `zeta` samples for the quadratic fit (one more than needed).
pub const FIT_ZETAS: [Complex64; 4] = [ZERO, ONE, I, Complex64::new(-0.6, 0.8)];

/// `Theta(a) = g_x(v, d pi(a))` at `z = (x, v)` for `a = (dx, dv)`.
pub fn theta(spec: &ManifoldSpec, z: &TangentPoint, dx: &[f64]) -> Result<f64> {
    let g = spec.metric_real(&z.x)?;
    if dx.len() != spec.dim || z.v.len() != spec.dim {
        return Err(Error::Structure("tangent vector dimension mismatch".into()));
    }
    let v = DVector::from_column_slice(&z.v);
    let d = DVector::from_column_slice(dx);
    Ok(v.dot(&(g * d)))
}

/// `Theta~(a) = g~_y(beta, d pi(a))` at a fibre point, for `d pi(a) = dy`.
pub fn theta_tilde(spec: &ManifoldSpec, tp: &TwistorPoint, dy: &[Complex64]) -> Result<Complex64> {
    if dy.len() != spec.dim {
        return Err(Error::Structure("tangent vector dimension mismatch".into()));
    }
    spec.pairing(&tp.y, &tp.beta, dy)
}

/// A first-order variation `(dy, dbeta)` at a fibre point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibreVector {
    pub dy: Vec<Complex64>,
    pub dbeta: Vec<Complex64>,
}

/// `d Theta~(a, b) = g~_kl (da_beta^k db_y^l - db_beta^k da_y^l)
///   + d_m g~_kl beta^k (da_y^m db_y^l - db_y^m da_y^l)` at `(y, beta)`.
pub fn d_theta_tilde(
    spec: &ManifoldSpec,
    y: &[Complex64],
    beta: &[Complex64],
    a: &FibreVector,
    b: &FibreVector,
) -> Result<Complex64> {
    let n = spec.dim;
    let jets: Vec<Jet> = (0..n).map(|k| Jet::variable(n, 1, k, y[k])).collect();
    let g = spec.metric_at(&jets)?;
    let mut s = ZERO;
    for k in 0..n {
        for l in 0..n {
            let gkl = &g[k][l];
            s += gkl.constant_term() * (a.dbeta[k] * b.dy[l] - b.dbeta[k] * a.dy[l]);
            for m in 0..n {
                s += gkl.linear_coeff(m) * beta[k] * (a.dy[m] * b.dy[l] - b.dy[m] * a.dy[l]);
            }
        }
    }
    Ok(s)
}

/// Value at `zeta` of the real normal-bundle section with parameters
/// `theta = (X, V1, V2, V3)`.
pub fn variation_at(n: usize, theta: &[f64], zeta: Complex64) -> FibreVector {
    let part = |k: usize| &theta[k * n..(k + 1) * n];
    let (x, v1, v2, v3) = (part(0), part(1), part(2), part(3));
    let dy = (0..n)
        .map(|k| Complex64::new(x[k], v1[k]) + Complex64::new(v2[k], -v3[k]) * zeta)
        .collect();
    let dbeta = (0..n)
        .map(|k| Complex64::new(v2[k], v3[k]) + I * 2.0 * v1[k] * zeta + Complex64::new(v2[k], -v3[k]) * zeta * zeta)
        .collect();
    FibreVector { dy, dbeta }
}

/// Real `4n x 4n` matrix of the evaluation map at `zeta`, rows
/// `(Re dy, Re dbeta, Im dy, Im dbeta)`.
pub fn evaluation_matrix(n: usize, zeta: Complex64) -> DMatrix<f64> {
    let m = 4 * n;
    let mut e = DMatrix::zeros(m, m);
    for c in 0..m {
        let mut basis = vec![0.0; m];
        basis[c] = 1.0;
        let f = variation_at(n, &basis, zeta);
        for (r, val) in f.dy.iter().chain(&f.dbeta).enumerate() {
            e[(r, c)] = val.re;
            e[(2 * n + r, c)] = val.im;
        }
    }
    e
}

/// Complex structure `E^-1 (i) E` transported from the fibre at `zeta`.
pub fn complex_structure_at(n: usize, zeta: Complex64) -> Result<DMatrix<f64>> {
    let e = evaluation_matrix(n, zeta);
    let mut jstd = DMatrix::zeros(4 * n, 4 * n);
    for k in 0..2 * n {
        jstd[(k, 2 * n + k)] = -1.0;
        jstd[(2 * n + k, k)] = 1.0;
    }
    let rhs = jstd * &e;
    e.lu().solve(&rhs).ok_or_else(|| Error::Singular {
        what: format!("evaluation map at zeta = {}", zeta),
        condition: f64::INFINITY,
    })
}

/// Least-squares fit `M(zeta) = C0 + C1 zeta + C2 zeta^2` of matrix samples;
/// returns the coefficients and the largest sample residual.
pub fn fit_quadratic(samples: &[(Complex64, DMatrix<Complex64>)]) -> Result<([DMatrix<Complex64>; 3], f64)> {
    let mut distinct: Vec<Complex64> = Vec::new();
    for (z, _) in samples {
        if distinct.iter().all(|d| (d - z).norm() > 1e-12) {
            distinct.push(*z);
        }
    }
    if distinct.len() < 3 {
        return Err(Error::Config(
            "a quadratic fit needs at least three distinct zeta samples".into(),
        ));
    }
    let vand = DMatrix::from_fn(samples.len(), 3, |r, c| samples[r].0.powi(c as i32));
    let svd = vand.clone().svd(true, true);
    let (rows, cols) = samples[0].1.shape();
    let mut coeffs = [
        DMatrix::zeros(rows, cols),
        DMatrix::zeros(rows, cols),
        DMatrix::zeros(rows, cols),
    ];
    let mut residual: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let rhs = DVector::from_fn(samples.len(), |r, _| samples[r].1[(i, j)]);
            let sol = svd
                .solve(&rhs, 1e-14)
                .map_err(|e| Error::Config(format!("quadratic fit failed: {}", e)))?;
            for k in 0..3 {
                coeffs[k][(i, j)] = sol[k];
            }
            residual = residual.max((&vand * &sol - rhs).amax_complex());
        }
    }
    Ok((coeffs, residual))
}

trait ComplexMax {
    fn amax_complex(&self) -> f64;
}

impl ComplexMax for DVector<Complex64> {
    fn amax_complex(&self) -> f64 {
        self.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `omega_1, omega_2, omega_3` from `Omega = (w2 + i w3) + 2 i w1 zeta + (w2 - i w3) zeta^2`;
/// also returns the largest imaginary part discarded.
pub fn split_triple(c: &[DMatrix<Complex64>; 3]) -> ([DMatrix<f64>; 3], f64) {
    let w1 = &c[1] / (2.0 * I);
    let w2 = (&c[0] + &c[2]) / Complex64::new(2.0, 0.0);
    let w3 = (&c[0] - &c[2]) / (2.0 * I);
    let imag = [&w1, &w2, &w3]
        .iter()
        .map(|m| m.iter().map(|z| z.im.abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    ([w1.map(|z| z.re), w2.map(|z| z.re), w3.map(|z| z.re)], imag)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormTriple {
    pub x: Vec<f64>,
    pub omega: [DMatrix<f64>; 3],
    pub j: [DMatrix<f64>; 3],
    /// `G(a, b) = omega_1(J_1 a, b)`.
    pub g: DMatrix<f64>,
    /// Largest residual of the quadratic fit in `zeta`.
    pub fit_residual: f64,
    /// Largest imaginary part of the extracted forms.
    pub reality_defect: f64,
}

impl FormTriple {
    /// `G_i(a, b) = omega_i(J_i a, b)` as a matrix.
    pub fn metric_from(&self, i: usize) -> DMatrix<f64> {
        self.j[i].transpose() * &self.omega[i]
    }

    pub fn symmetry_defect(&self) -> f64 {
        (&self.g - self.g.transpose()).amax()
    }

    /// Largest disagreement between the three reconstructions of `G`.
    pub fn reconstruction_defect(&self) -> f64 {
        let g1 = self.metric_from(0);
        (1..3).map(|i| (&self.metric_from(i) - &g1).amax()).fold(0.0, f64::max)
    }

    /// `max |J_1 J_2 - J_3|`.
    pub fn quaternion_defect(&self) -> f64 {
        (&self.j[0] * &self.j[1] - &self.j[2]).amax()
    }

    /// Largest `G`-pairing between different blocks among `T_x X` and its
    /// images under `J_1, J_2, J_3`.
    pub fn block_orthogonality_defect(&self) -> f64 {
        let n = self.x.len();
        let base = DMatrix::from_fn(4 * n, n, |r, c| if r == c { 1.0 } else { 0.0 });
        let blocks = [base.clone(), &self.j[0] * &base, &self.j[1] * &base, &self.j[2] * &base];
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in a + 1..4 {
                worst = worst.max((blocks[a].transpose() * &self.g * &blocks[b]).amax());
            }
        }
        worst
    }

    pub fn omega2_determinant(&self) -> f64 {
        self.omega[1].clone().determinant()
    }

    /// `G` restricted to the `X` block.
    pub fn base_block(&self) -> DMatrix<f64> {
        let n = self.x.len();
        self.g.view((0, 0), (n, n)).into_owned()
    }
}

/// The form triple at the constant section over `x`, sampled at `zetas`.
pub fn omega_triple_with(spec: &ManifoldSpec, x: &[f64], zetas: &[Complex64]) -> Result<FormTriple> {
    let n = spec.dim;
    if x.len() != n {
        return Err(Error::Structure("base point dimension mismatch".into()));
    }
    spec.metric.as_ref().ok_or(Error::NoMetric)?;
    let y = to_complex(x);
    let beta = vec![ZERO; n];
    let m = 4 * n;
    let basis = |c: usize| {
        let mut t = vec![0.0; m];
        t[c] = 1.0;
        t
    };
    let mut samples = Vec::with_capacity(zetas.len());
    for &zeta in zetas {
        let vars: Vec<FibreVector> = (0..m).map(|c| variation_at(n, &basis(c), zeta)).collect();
        let mut om = DMatrix::zeros(m, m);
        for a in 0..m {
            for b in a + 1..m {
                let v = d_theta_tilde(spec, &y, &beta, &vars[a], &vars[b])?;
                om[(a, b)] = v;
                om[(b, a)] = -v;
            }
        }
        samples.push((zeta, om));
    }
    let (coeffs, fit_residual) = fit_quadratic(&samples)?;
    let (omega, reality_defect) = split_triple(&coeffs);
    let j = [
        complex_structure_at(n, J_ZETAS[0])?,
        complex_structure_at(n, J_ZETAS[1])?,
        complex_structure_at(n, J_ZETAS[2])?,
    ];
    let g = j[0].transpose() * &omega[0];
    Ok(FormTriple {
        x: x.to_vec(),
        omega,
        j,
        g,
        fit_residual,
        reality_defect,
    })
}

pub fn omega_triple_at_x(spec: &ManifoldSpec, x: &[f64]) -> Result<FormTriple> {
    omega_triple_with(spec, x, &FIT_ZETAS)
}

/// `(positive, negative)` eigenvalue counts of `G` at `x`, with eigenvalues
/// below `1e-8 |G|` reported as a singular form.
pub fn signature_at_x(spec: &ManifoldSpec, x: &[f64]) -> Result<(usize, usize)> {
    let t = omega_triple_at_x(spec, x)?;
    signature_of(&t.g, 1e-8)
}

/// `dTheta(a1, a2) = a1(Theta(a2)) - a2(Theta(a1))` for constant coordinate
/// fields on `TX`, by Richardson-extrapolated central differences.
pub fn d_theta_fd(spec: &ManifoldSpec, z: &TangentPoint, a1: &[f64], a2: &[f64], h: f64) -> Result<f64> {
    let n = spec.dim;
    let directional = |dir: &[f64], arg: &[f64]| -> Result<f64> {
        let at = |s: f64| -> Result<f64> {
            let p = TangentPoint::new(
                (0..n).map(|k| z.x[k] + s * dir[k]).collect(),
                (0..n).map(|k| z.v[k] + s * dir[n + k]).collect(),
            );
            theta(spec, &p, &arg[..n])
        };
        let central = |s: f64| -> Result<f64> { Ok((at(s)? - at(-s)?) / (2.0 * s)) };
        Ok((4.0 * central(0.5 * h)? - central(h)?) / 3.0)
    };
    Ok(directional(a1, a2)? - directional(a2, a1)?)
}

/// `omega_1(s1, s2)` for the variations of the point-section family induced by
/// tangent vectors `a1, a2` (each `(dx, dv)`) at `z = (x, v)`; also returns the
/// imaginary part that a real form must not have.
pub fn omega1_on_point_sections(
    spec: &ManifoldSpec,
    z: &TangentPoint,
    a1: &[f64],
    a2: &[f64],
    steps: usize,
) -> Result<(f64, f64)> {
    let n = spec.dim;
    let iv: Vec<Complex64> = z.v.iter().map(|&a| Complex64::new(0.0, a)).collect();
    let jac = exp_c_differential(spec, &to_complex(&z.x), &iv, ONE, steps)?.matrix;
    let y1 = flow_state(spec, z, steps)?;
    let push = |a: &[f64]| -> (Vec<Complex64>, Vec<Complex64>) {
        let seed: Vec<Complex64> = (0..2 * n)
            .map(|c| {
                if c < n {
                    Complex64::new(a[c], 0.0)
                } else {
                    Complex64::new(0.0, a[c])
                }
            })
            .collect();
        let out: Vec<Complex64> = (0..2 * n)
            .map(|r| (0..2 * n).map(|c| jac[(r, c)] * seed[c]).sum())
            .collect();
        (out[..n].to_vec(), out[n..].to_vec())
    };
    let (b1, w1) = push(a1);
    let (b2, w2) = push(a2);
    let mut samples = Vec::new();
    for zeta in [ONE, I, -ONE] {
        let beta: Vec<Complex64> = y1.1.iter().map(|v| v * zeta * 2.0).collect();
        let f1 = FibreVector {
            dy: b1.clone(),
            dbeta: w1.iter().map(|v| v * zeta * 2.0).collect(),
        };
        let f2 = FibreVector {
            dy: b2.clone(),
            dbeta: w2.iter().map(|v| v * zeta * 2.0).collect(),
        };
        let val = d_theta_tilde(spec, &y1.0, &beta, &f1, &f2)?;
        samples.push((zeta, DMatrix::from_element(1, 1, val)));
    }
    let (coeffs, _) = fit_quadratic(&samples)?;
    let w = coeffs[1][(0, 0)] / (2.0 * I);
    Ok((w.re, w.im.abs()))
}

fn flow_state(spec: &ManifoldSpec, z: &TangentPoint, steps: usize) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let iv: Vec<Complex64> = z.v.iter().map(|&a| Complex64::new(0.0, a)).collect();
    let st = crate::geometry::geodesic_flow(
        spec,
        &crate::geometry::PhaseState::new(to_complex(&z.x), iv),
        ONE,
        steps,
    )?;
    Ok((st.y, st.beta))
}

/// One comparison of `omega_1` against `dTheta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LempertSzokeSample {
    pub point: TangentPoint,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

/// `max |omega_1(s1, s2) - dTheta(a1, a2)|` (imaginary parts of `omega_1`
/// count as defects).
pub fn lempert_szoke_check(spec: &ManifoldSpec, samples: &[LempertSzokeSample], steps: usize) -> Result<f64> {
    spec.metric.as_ref().ok_or(Error::NoMetric)?;
    let mut worst: f64 = 0.0;
    for s in samples {
        let (w, imag) = omega1_on_point_sections(spec, &s.point, &s.a1, &s.a2, steps)?;
        let d = d_theta_fd(spec, &s.point, &s.a1, &s.a2, D_THETA_STEP)?;
        worst = worst.max((w - d).abs()).max(imag);
    }
    Ok(worst)
}

/// `|g~(g'(1), u(1)) - g~(g'(0), u(0)) - g~(g'(0), u'(0))|` for the Jacobi
/// field `u` along `t -> exp^C_x(i t v)` with `u(0) = u0`, `D_t u(0) = u0_dot`.
pub fn jacobi_identity_check(
    spec: &ManifoldSpec,
    x: &[f64],
    v: &[f64],
    u0: &[Complex64],
    u0_dot: &[Complex64],
    steps: usize,
) -> Result<f64> {
    let y = to_complex(x);
    let iv: Vec<Complex64> = v.iter().map(|&a| Complex64::new(0.0, a)).collect();
    let s = jacobi_field(spec, &y, &iv, u0, u0_dot, &[ONE], steps)?;
    let end = &s[0];
    let lhs = spec.pairing(&end.position, &end.velocity, &end.u)?;
    let rhs = spec.pairing(&y, &iv, u0)? + spec.pairing(&y, &iv, u0_dot)?;
    Ok((lhs - rhs).norm())
}

/// `u(t) = lambda g'(t) + t mu g'(t) + U(t)` with `U` orthogonal to `g'`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiDecomposition {
    pub lambda: Complex64,
    pub mu: Complex64,
    pub times: Vec<Complex64>,
    /// Euclidean norm of the components of `U(t)`.
    pub u_norm_profile: Vec<f64>,
    /// `max_t |g~(U(t), g'(t))|`.
    pub orthogonality_defect: f64,
}

pub fn jacobi_decomposition(
    spec: &ManifoldSpec,
    x: &[f64],
    v: &[f64],
    u0: &[Complex64],
    u0_dot: &[Complex64],
    times: &[Complex64],
    steps: usize,
) -> Result<JacobiDecomposition> {
    let y = to_complex(x);
    let iv: Vec<Complex64> = v.iter().map(|&a| Complex64::new(0.0, a)).collect();
    let energy = spec.pairing(&y, &iv, &iv)?;
    if energy.norm() < 1e-14 {
        return Err(Error::Singular {
            what: "null geodesic in the Jacobi decomposition".into(),
            condition: f64::INFINITY,
        });
    }
    let lambda = spec.pairing(&y, &iv, u0)? / energy;
    let mu = spec.pairing(&y, &iv, u0_dot)? / energy;
    let samples = jacobi_field(spec, &y, &iv, u0, u0_dot, times, steps)?;
    let mut profile = Vec::with_capacity(samples.len());
    let mut worst: f64 = 0.0;
    for s in &samples {
        let coeff = lambda + s.t * mu;
        let big_u: Vec<Complex64> = s.u.iter().zip(&s.velocity).map(|(u, g)| u - g * coeff).collect();
        profile.push(big_u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
        worst = worst.max(spec.pairing(&s.position, &big_u, &s.velocity)?.norm());
    }
    Ok(JacobiDecomposition {
        lambda,
        mu,
        times: times.to_vec(),
        u_norm_profile: profile,
        orthogonality_defect: worst,
    })
}
