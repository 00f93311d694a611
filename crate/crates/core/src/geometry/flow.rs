//! Geodesic flow of the complexified connection in complex time.
//!
//! The flow `y' = beta, beta'^k = -Gamma^k_{ij}(y) beta^i beta^j` is
//! integrated with classical fixed-step RK4 along straight segments of the
//! complex time plane. Every routine is generic over [`Scalar`], so seeding the
//! initial state with jets yields exact derivatives of the discrete flow map.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::{gamma_contract_terms, GammaTerms, ManifoldSpec};
use crate::error::{Error, Result};
use crate::series::{Jet, Scalar};

/// A point of the holomorphic tangent bundle in chart coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub y: Vec<Complex64>,
    pub beta: Vec<Complex64>,
}

impl PhaseState {
    pub fn new(y: Vec<Complex64>, beta: Vec<Complex64>) -> Self {
        PhaseState { y, beta }
    }

    pub fn real(y: &[f64], beta: &[f64]) -> Self {
        PhaseState {
            y: to_complex(y),
            beta: to_complex(beta),
        }
    }

    pub fn conj(&self) -> Self {
        PhaseState {
            y: self.y.iter().map(|c| c.conj()).collect(),
            beta: self.beta.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn distance(&self, other: &PhaseState) -> f64 {
        max_diff(&self.y, &other.y).max(max_diff(&self.beta, &other.beta))
    }
}

pub fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Which extra vector rides along with the geodesic.
#[derive(Clone, Copy, PartialEq)]
enum Carry {
    None,
    /// Parallel transport: `w'^k = -Gamma^k_{ij} beta^i w^j`.
    Transport,
}

struct Rhs<'a> {
    n: usize,
    terms: GammaTerms<'a>,
    carry: Carry,
}

impl Rhs<'_> {
    fn eval<T: Scalar>(&self, s: &[T]) -> Result<Vec<T>> {
        let n = self.n;
        let (y, rest) = s.split_at(n);
        let beta = &rest[..n];
        let acc = gamma_contract_terms(&self.terms, n, y, beta, beta)?;
        let mut out = Vec::with_capacity(s.len());
        out.extend(beta.iter().cloned());
        out.extend(acc.into_iter().map(|a| -a));
        if self.carry == Carry::Transport {
            let w = &rest[n..2 * n];
            let dw = gamma_contract_terms(&self.terms, n, y, beta, w)?;
            out.extend(dw.into_iter().map(|a| -a));
        }
        Ok(out)
    }
}

fn axpy<T: Scalar>(x: &[T], h: Complex64, k: &[T]) -> Vec<T> {
    x.iter().zip(k).map(|(a, b)| a.clone() + b.scale(h)).collect()
}

fn check_state<T: Scalar>(spec: &ManifoldSpec, s: &[T], fraction: f64) -> Result<()> {
    let n = spec.dim;
    let mut magnitude: f64 = 0.0;
    for v in s {
        let c = v.value();
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::BlowUp {
                fraction,
                magnitude: f64::INFINITY,
            });
        }
        magnitude = magnitude.max(c.norm());
    }
    if magnitude > spec.blowup_bound {
        return Err(Error::BlowUp { fraction, magnitude });
    }
    let d = &spec.chart_domain;
    for k in 0..n {
        let c = s[k].value();
        if c.re < d.lower[k] || c.re > d.upper[k] {
            return Err(Error::DomainExit {
                fraction,
                detail: format!(
                    "coordinate {} real part {:.4} outside [{}, {}]",
                    k, c.re, d.lower[k], d.upper[k]
                ),
            });
        }
        if c.im.abs() > spec.tube_radius {
            return Err(Error::DomainExit {
                fraction,
                detail: format!(
                    "coordinate {} imaginary part {:.4} exceeds tube radius {}",
                    k, c.im, spec.tube_radius
                ),
            });
        }
    }
    Ok(())
}

/// RK4 along the straight segment `0 -> z` of complex time.
fn integrate<T: Scalar>(
    spec: &ManifoldSpec,
    carry: Carry,
    state: Vec<T>,
    z: Complex64,
    steps: usize,
) -> Result<Vec<T>> {
    if steps == 0 {
        return Err(Error::Config("steps must be at least 1".into()));
    }
    check_state(spec, &state, 0.0)?;
    if z.norm() == 0.0 {
        return Ok(state);
    }
    let rhs = Rhs {
        n: spec.dim,
        terms: spec.gamma_terms(),
        carry,
    };
    let h = z / steps as f64;
    let half = h * 0.5;
    let sixth = h / 6.0;
    let mut s = state;
    for step in 0..steps {
        let k1 = rhs.eval(&s)?;
        let k2 = rhs.eval(&axpy(&s, half, &k1))?;
        let k3 = rhs.eval(&axpy(&s, half, &k2))?;
        let k4 = rhs.eval(&axpy(&s, h, &k3))?;
        s = s
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let incr =
                    k1[i].clone() + (k2[i].clone() + k3[i].clone()).scale(Complex64::new(2.0, 0.0)) + k4[i].clone();
                v.clone() + incr.scale(sixth)
            })
            .collect();
        check_state(spec, &s, (step + 1) as f64 / steps as f64)?;
    }
    Ok(s)
}

fn check_len(spec: &ManifoldSpec, what: &str, len: usize) -> Result<()> {
    if len != spec.dim {
        Err(Error::Structure(format!(
            "{} has {} components, expected {}",
            what, len, spec.dim
        )))
    } else {
        Ok(())
    }
}

/// Geodesic flow on arbitrary scalars: `(y, beta)` advanced by complex time `z`.
pub fn flow_generic<T: Scalar>(
    spec: &ManifoldSpec,
    y: Vec<T>,
    beta: Vec<T>,
    z: Complex64,
    steps: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    check_len(spec, "position", y.len())?;
    check_len(spec, "velocity", beta.len())?;
    let n = spec.dim;
    let mut state = y;
    state.extend(beta);
    let out = integrate(spec, Carry::None, state, z, steps)?;
    let (a, b) = out.split_at(n);
    Ok((a.to_vec(), b.to_vec()))
}

/// Geodesic flow with a parallel-transported vector riding along.
pub fn flow_transport_generic<T: Scalar>(
    spec: &ManifoldSpec,
    y: Vec<T>,
    beta: Vec<T>,
    w: Vec<T>,
    z: Complex64,
    steps: usize,
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    check_len(spec, "position", y.len())?;
    check_len(spec, "velocity", beta.len())?;
    check_len(spec, "transported vector", w.len())?;
    let n = spec.dim;
    let mut state = y;
    state.extend(beta);
    state.extend(w);
    let out = integrate(spec, Carry::Transport, state, z, steps)?;
    Ok((out[..n].to_vec(), out[n..2 * n].to_vec(), out[2 * n..].to_vec()))
}

/// Advances `s` along the straight complex-time segment `0 -> z`.
pub fn geodesic_flow(spec: &ManifoldSpec, s: &PhaseState, z: Complex64, steps: usize) -> Result<PhaseState> {
    let (y, beta) = flow_generic(spec, s.y.clone(), s.beta.clone(), z, steps)?;
    Ok(PhaseState { y, beta })
}

/// Advances `s` along the polygonal complex-time path `0 -> w_1 -> ... -> w_m`,
/// `steps` RK4 steps per segment.
pub fn geodesic_flow_path(
    spec: &ManifoldSpec,
    s: &PhaseState,
    waypoints: &[Complex64],
    steps: usize,
) -> Result<PhaseState> {
    let mut state = s.clone();
    let mut t = Complex64::new(0.0, 0.0);
    for &w in waypoints {
        state = geodesic_flow(spec, &state, w - t, steps)?;
        t = w;
    }
    Ok(state)
}

/// Holomorphic exponential map: the position reached from `y` with initial
/// velocity `v` after complex time `z`.
pub fn exp_c(
    spec: &ManifoldSpec,
    y: &[Complex64],
    v: &[Complex64],
    z: Complex64,
    steps: usize,
) -> Result<Vec<Complex64>> {
    Ok(geodesic_flow(spec, &PhaseState::new(y.to_vec(), v.to_vec()), z, steps)?.y)
}

/// Differential of the time-`z` flow map `(y, v) -> (y(z), beta(z))`.
#[derive(Clone, Debug)]
pub struct FlowJacobian {
    /// `2n x 2n`; rows are `(y(z), beta(z))`, columns `(y, v)`.
    pub matrix: DMatrix<Complex64>,
    pub n: usize,
}

impl FlowJacobian {
    /// `n x 2n` block: the differential of `(y, v) -> exp^C_y(z v)`.
    pub fn exp_block(&self) -> DMatrix<Complex64> {
        self.matrix.rows(0, self.n).into_owned()
    }

    /// Condition number of `d exp / d v`; large values flag conjugate points.
    pub fn velocity_block_condition(&self) -> f64 {
        let b = self.matrix.view((0, self.n), (self.n, self.n)).into_owned();
        condition_number(&b)
    }
}

pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let smin = sv.min();
    if smin == 0.0 {
        f64::INFINITY
    } else {
        sv.max() / smin
    }
}

/// Flow differential by running the flow on first-order jets seeded at `(y, v)`.
pub fn exp_c_differential(
    spec: &ManifoldSpec,
    y: &[Complex64],
    v: &[Complex64],
    z: Complex64,
    steps: usize,
) -> Result<FlowJacobian> {
    let n = spec.dim;
    check_len(spec, "position", y.len())?;
    check_len(spec, "velocity", v.len())?;
    let yj: Vec<Jet> = (0..n).map(|k| Jet::variable(2 * n, 1, k, y[k])).collect();
    let vj: Vec<Jet> = (0..n).map(|k| Jet::variable(2 * n, 1, n + k, v[k])).collect();
    let (yo, bo) = flow_generic(spec, yj, vj, z, steps)?;
    let matrix = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let jet = if r < n { &yo[r] } else { &bo[r - n] };
        jet.linear_coeff(c)
    });
    Ok(FlowJacobian { matrix, n })
}

/// One sample of a Jacobi field along a complex geodesic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JacobiSample {
    pub t: Complex64,
    pub position: Vec<Complex64>,
    pub velocity: Vec<Complex64>,
    pub u: Vec<Complex64>,
    /// Covariant derivative `D_t u = u' + Gamma(velocity, u)`.
    pub u_dot: Vec<Complex64>,
}

/// Jacobi field along `t -> exp^C_y(t v)` with `u(0) = u0` and covariant
/// derivative `D_t u(0) = u0_dot`, obtained as the first-order variation of
/// the geodesic flow. The field is sampled at every entry of `t_grid`
/// (integrated segment by segment from `t = 0`, `steps` per segment).
pub fn jacobi_field(
    spec: &ManifoldSpec,
    y: &[Complex64],
    v: &[Complex64],
    u0: &[Complex64],
    u0_dot: &[Complex64],
    t_grid: &[Complex64],
    steps: usize,
) -> Result<Vec<JacobiSample>> {
    let n = spec.dim;
    check_len(spec, "position", y.len())?;
    check_len(spec, "velocity", v.len())?;
    check_len(spec, "u0", u0.len())?;
    check_len(spec, "u0_dot", u0_dot.len())?;
    let correction = spec.gamma_contract(y, v, u0)?;
    let mut yj: Vec<Jet> = (0..n)
        .map(|k| &Jet::constant(1, 1, y[k]) + &Jet::variable(1, 1, 0, Complex64::new(0.0, 0.0)).scale(u0[k]))
        .collect();
    let mut bj: Vec<Jet> = (0..n)
        .map(|k| {
            &Jet::constant(1, 1, v[k])
                + &Jet::variable(1, 1, 0, Complex64::new(0.0, 0.0)).scale(u0_dot[k] - correction[k])
        })
        .collect();
    let mut t = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let (a, b) = flow_generic(spec, yj, bj, target - t, steps)?;
        yj = a;
        bj = b;
        t = target;
        let position: Vec<Complex64> = yj.iter().map(|j| j.constant_term()).collect();
        let velocity: Vec<Complex64> = bj.iter().map(|j| j.constant_term()).collect();
        let u: Vec<Complex64> = yj.iter().map(|j| j.linear_coeff(0)).collect();
        let du: Vec<Complex64> = bj.iter().map(|j| j.linear_coeff(0)).collect();
        let corr = spec.gamma_contract(&position, &velocity, &u)?;
        let u_dot = du.iter().zip(&corr).map(|(a, b)| a + b).collect();
        out.push(JacobiSample {
            t,
            position,
            velocity,
            u,
            u_dot,
        });
    }
    Ok(out)
}

/// Parallel transport of `w0` along `t -> exp^C_y(t v)`, sampled on `t_grid`.
pub fn parallel_transport(
    spec: &ManifoldSpec,
    y: &[Complex64],
    v: &[Complex64],
    t_grid: &[Complex64],
    w0: &[Complex64],
    steps: usize,
) -> Result<Vec<Vec<Complex64>>> {
    let mut yy = y.to_vec();
    let mut bb = v.to_vec();
    let mut ww = w0.to_vec();
    let mut t = Complex64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let (a, b, c) = flow_transport_generic(spec, yy, bb, ww, target - t, steps)?;
        yy = a;
        bb = b;
        ww = c;
        t = target;
        out.push(ww.clone());
    }
    Ok(out)
}

/// Riemann curvature `R^k_{lij}` (`R(d_i, d_j) d_l`) at a point, with the
/// Christoffel derivatives taken by first-order jets.
pub fn curvature_at(spec: &ManifoldSpec, y: &[Complex64]) -> Result<Vec<Vec<Vec<Vec<Complex64>>>>> {
    let n = spec.dim;
    check_len(spec, "position", y.len())?;
    let yj: Vec<Jet> = (0..n).map(|k| Jet::variable(n, 1, k, y[k])).collect();
    let g = spec.christoffel_at(&yj)?;
    let val = |k: usize, i: usize, j: usize| g[k][i][j].constant_term();
    let der = |k: usize, i: usize, j: usize, m: usize| g[k][i][j].linear_coeff(m);
    let zero = Complex64::new(0.0, 0.0);
    let mut r = vec![vec![vec![vec![zero; n]; n]; n]; n];
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    // R(d_i, d_j) d_l = nabla_i nabla_j d_l - nabla_j nabla_i d_l
                    let mut s = der(k, j, l, i) - der(k, i, l, j);
                    for m in 0..n {
                        s += val(m, j, l) * val(k, i, m) - val(m, i, l) * val(k, j, m);
                    }
                    r[k][l][i][j] = s;
                }
            }
        }
    }
    Ok(r)
}

/// Largest curvature component over the spec's sample points.
pub fn max_curvature(spec: &ManifoldSpec) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in spec.sample_points() {
        let r = curvature_at(spec, &to_complex(&x))?;
        for c in r.iter().flatten().flatten().flatten() {
            worst = worst.max(c.norm());
        }
    }
    Ok(worst)
}
