//! Flat connections: parallel vector fields as jets, their flows, the Nahm
//! system in the Lie algebra of vector fields, the frame flows solving the
//! associated factorization problem, and the resulting twistor sections.
//!
//! Vector-field brackets here are `[X, Y]^k = X^i d_i Y^k - Y^i d_i X^k`.
//! The Nahm system is written with the opposite (Lie-algebra) bracket
//! `[X, Y]_g = -[X, Y]`:
//!
//! `B0' = [B0, B1]_g / 2`, `B1' = [B0, B2]_g`, `B2' = [B1, B2]_g / 2`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalog::FLATNESS_THRESHOLD;
use crate::error::{Error, Result};
use crate::geometry::{exp_c, flow_transport_generic, max_curvature, max_diff, to_complex, ManifoldSpec};
use crate::series::{compose, invert, Jet};
use crate::twistor::{Patch, Section, SectionKind, TwistorPoint};

/// Default working jet order.
pub const DEFAULT_ORDER: usize = 6;
/// Default trust radius (max-norm distance from the expansion point).
pub const DEFAULT_TRUST_RADIUS: f64 = 0.6;
/// Default step count for autonomous field flows.
pub const DEFAULT_FLOW_STEPS: usize = 100;
/// Default number of frame RK4 steps on `[0, 1]`; the Nahm grid is twice as fine.
pub const DEFAULT_FRAME_STEPS: usize = 64;
/// Coefficient bound for the Nahm integration.
pub const NAHM_BLOWUP: f64 = 1e6;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Truncated Taylor expansion of a holomorphic vector field at `center`.
#[derive(Clone, Debug, PartialEq)]
pub struct JetVectorField {
    pub center: Vec<Complex64>,
    pub components: Vec<Jet>,
    pub trust_radius: f64,
}

impl JetVectorField {
    pub fn new(center: Vec<Complex64>, components: Vec<Jet>, trust_radius: f64) -> Result<Self> {
        let n = center.len();
        if components.len() != n {
            return Err(Error::Structure(format!(
                "{} components for dimension {}",
                components.len(),
                n
            )));
        }
        if let Some(first) = components.first() {
            if components.iter().any(|c| c.num_vars() != n || !c.same_shape(first)) {
                return Err(Error::Structure(
                    "field components must be jets in n variables of one order".into(),
                ));
            }
        }
        Ok(JetVectorField {
            center,
            components,
            trust_radius,
        })
    }

    pub fn zero(center: Vec<Complex64>, order: usize) -> Self {
        let n = center.len();
        JetVectorField {
            components: vec![Jet::zero(n, order); n],
            center,
            trust_radius: DEFAULT_TRUST_RADIUS,
        }
    }

    pub fn constant(center: Vec<Complex64>, v: &[Complex64], order: usize) -> Self {
        let n = center.len();
        JetVectorField {
            components: v.iter().map(|&c| Jet::constant(n, order, c)).collect(),
            center,
            trust_radius: DEFAULT_TRUST_RADIUS,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn order(&self) -> usize {
        self.components.first().map(|c| c.order()).unwrap_or(0)
    }

    fn check_compatible(&self, other: &JetVectorField) -> Result<()> {
        if self.center != other.center || self.order() != other.order() || self.dim() != other.dim() {
            return Err(Error::Structure(
                "vector fields differ in center, order or dimension".into(),
            ));
        }
        Ok(())
    }

    fn zip_with(&self, other: &JetVectorField, f: impl Fn(&Jet, &Jet) -> Jet) -> Result<JetVectorField> {
        self.check_compatible(other)?;
        Ok(JetVectorField {
            center: self.center.clone(),
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| f(a, b))
                .collect(),
            trust_radius: self.trust_radius.min(other.trust_radius),
        })
    }

    pub fn add(&self, other: &JetVectorField) -> Result<JetVectorField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &JetVectorField) -> Result<JetVectorField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> JetVectorField {
        JetVectorField {
            center: self.center.clone(),
            components: self.components.iter().map(|j| j.scale(c)).collect(),
            trust_radius: self.trust_radius,
        }
    }

    /// Vector-field bracket; exact through order `K - 1`.
    pub fn bracket(&self, other: &JetVectorField) -> Result<JetVectorField> {
        self.check_compatible(other)?;
        let n = self.dim();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = Jet::zero(n, self.order());
            for i in 0..n {
                acc = &acc + &(&self.components[i] * &other.components[k].derivative(i));
                acc = &acc - &(&other.components[i] * &self.components[k].derivative(i));
            }
            out.push(acc);
        }
        Ok(JetVectorField {
            center: self.center.clone(),
            components: out,
            trust_radius: self.trust_radius.min(other.trust_radius),
        })
    }

    /// Lie-algebra bracket `[X, Y]_g = -[X, Y]`.
    pub fn algebra_bracket(&self, other: &JetVectorField) -> Result<JetVectorField> {
        Ok(self.bracket(other)?.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Field value at an absolute point `p`.
    pub fn eval(&self, p: &[Complex64]) -> Result<Vec<Complex64>> {
        if p.len() != self.dim() {
            return Err(Error::Structure(format!(
                "point has {} coordinates, field dimension {}",
                p.len(),
                self.dim()
            )));
        }
        let offset: Vec<Complex64> = p.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let dist = offset.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !(dist <= self.trust_radius) {
            return Err(Error::TrustRadius {
                radius: self.trust_radius,
                distance: dist,
            });
        }
        self.components.iter().map(|c| c.eval(&offset)).collect()
    }

    /// Conjugation of the real structure, for fields centered at real points.
    pub fn tau_star(&self) -> JetVectorField {
        JetVectorField {
            center: self.center.iter().map(|c| c.conj()).collect(),
            components: self.components.iter().map(|c| c.conj()).collect(),
            trust_radius: self.trust_radius,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference.
    pub fn distance(&self, other: &JetVectorField) -> f64 {
        match self.sub(other) {
            Ok(d) if self.center == other.center => d.max_abs(),
            _ => f64::INFINITY,
        }
    }

    pub fn with_trust_radius(mut self, radius: f64) -> Self {
        self.trust_radius = radius;
        self
    }
}

/// Refuses curved connections: jet curvature at the sample points must stay
/// below the flatness threshold.
pub fn flatness_gate(spec: &ManifoldSpec) -> Result<()> {
    let k = max_curvature(spec)?;
    if k > FLATNESS_THRESHOLD {
        return Err(Error::NotFlat {
            curvature: k,
            threshold: FLATNESS_THRESHOLD,
        });
    }
    Ok(())
}

/// Parallel extensions of the coordinate basis at `x`, to jet order `order`.
///
/// With `P(u) = exp_x(u) - x` and `W_j(u)` the transport of `e_j` along
/// `t -> exp_x(t u)`, the field is `e^_j(x + p) = W_j(P^-1(p))`.
pub fn parallel_frame(
    spec: &ManifoldSpec,
    x: &[f64],
    order: usize,
    trust_radius: f64,
    steps: usize,
) -> Result<Vec<JetVectorField>> {
    flatness_gate(spec)?;
    let n = spec.dim;
    if x.len() != n {
        return Err(Error::Structure(format!(
            "base point has {} coordinates, dimension {}",
            x.len(),
            n
        )));
    }
    let mut p_inv: Option<Vec<Jet>> = None;
    let mut frame = Vec::with_capacity(n);
    for j in 0..n {
        let y: Vec<Jet> = (0..n)
            .map(|k| Jet::constant(n, order, Complex64::new(x[k], 0.0)))
            .collect();
        let beta: Vec<Jet> = (0..n)
            .map(|k| Jet::variable(n, order, k, Complex64::new(0.0, 0.0)))
            .collect();
        let w: Vec<Jet> = (0..n)
            .map(|k| Jet::constant(n, order, Complex64::new(if k == j { 1.0 } else { 0.0 }, 0.0)))
            .collect();
        let (yo, _, wo) = flow_transport_generic(spec, y, beta, w, Complex64::new(1.0, 0.0), steps)?;
        if p_inv.is_none() {
            let p: Vec<Jet> = yo.iter().map(|j| j.nonconstant_part()).collect();
            p_inv = Some(invert(&p)?);
        }
        let inv = p_inv.as_ref().expect("inverse computed above");
        let comps = wo.iter().map(|c| compose(c, inv)).collect::<Result<Vec<_>>>()?;
        frame.push(JetVectorField::new(to_complex(x), comps, trust_radius)?);
    }
    Ok(frame)
}

/// `sum_j v_j e^_j`.
pub fn combine(frame: &[JetVectorField], v: &[Complex64]) -> Result<JetVectorField> {
    let first = frame.first().ok_or_else(|| Error::Structure("empty frame".into()))?;
    if v.len() != frame.len() {
        return Err(Error::Structure(format!(
            "{} coefficients for a frame of {}",
            v.len(),
            frame.len()
        )));
    }
    let mut acc = JetVectorField::zero(first.center.clone(), first.order()).with_trust_radius(first.trust_radius);
    for (f, &c) in frame.iter().zip(v) {
        acc = acc.add(&f.scale(c))?;
    }
    Ok(acc)
}

/// The parallel field through `v` at `x`.
pub fn parallel_field(spec: &ManifoldSpec, x: &[f64], v: &[Complex64], order: usize) -> Result<JetVectorField> {
    let frame = parallel_frame(spec, x, order, DEFAULT_TRUST_RADIUS, crate::geometry::DEFAULT_STEPS)?;
    combine(&frame, v)
}

fn rk4<F>(mut q: Vec<Complex64>, t0: f64, t1: f64, steps: usize, f: F) -> Result<Vec<Complex64>>
where
    F: Fn(f64, &[Complex64]) -> Result<Vec<Complex64>>,
{
    if steps == 0 {
        return Err(Error::Config("step count must be positive".into()));
    }
    let h = (t1 - t0) / steps as f64;
    let axpy = |q: &[Complex64], a: f64, k: &[Complex64]| -> Vec<Complex64> {
        q.iter().zip(k).map(|(x, y)| x + y * a).collect()
    };
    for s in 0..steps {
        let t = t0 + s as f64 * h;
        let k1 = f(t, &q)?;
        let k2 = f(t + 0.5 * h, &axpy(&q, 0.5 * h, &k1))?;
        let k3 = f(t + 0.5 * h, &axpy(&q, 0.5 * h, &k2))?;
        let k4 = f(t + h, &axpy(&q, h, &k3))?;
        for i in 0..q.len() {
            q[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    Ok(q)
}

/// `e^{t V}(p)`.
pub fn flow_field(field: &JetVectorField, t: f64, p: &[Complex64], steps: usize) -> Result<Vec<Complex64>> {
    rk4(p.to_vec(), 0.0, t, steps, |_, q| field.eval(q))
}

/// `|exp_p(v) - e^{v^}(p)|` with the parallel field `v^` expanded at `p`.
pub fn verify_flat_identity(spec: &ManifoldSpec, p: &[f64], v: &[f64], order: usize, steps: usize) -> Result<f64> {
    let vc = to_complex(v);
    let field = parallel_field(spec, p, &vc, order)?;
    let lhs = exp_c(spec, &to_complex(p), &vc, Complex64::new(1.0, 0.0), steps)?;
    let rhs = flow_field(&field, 1.0, &to_complex(p), steps)?;
    Ok(max_diff(&lhs, &rhs))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NahmState {
    pub t: f64,
    pub b0: JetVectorField,
    pub b1: JetVectorField,
    pub b2: JetVectorField,
}

impl NahmState {
    /// `B0 = V2^ + i V3^`, `B1 = 2 i V1^`, `B2 = V2^ - i V3^` at `t = 0`.
    pub fn from_frame(frame: &[JetVectorField], v1: &[f64], v2: &[f64], v3: &[f64]) -> Result<Self> {
        let mix = |a: &[f64], s: f64| -> Vec<Complex64> {
            a.iter().zip(v3).map(|(&x, &y)| Complex64::new(x, s * y)).collect()
        };
        let f1 = combine(frame, &to_complex(v1))?;
        Ok(NahmState {
            t: 0.0,
            b0: combine(frame, &mix(v2, 1.0))?,
            b1: f1.scale(2.0 * I),
            b2: combine(frame, &mix(v2, -1.0))?,
        })
    }

    pub fn initial(
        spec: &ManifoldSpec,
        x: &[f64],
        v1: &[f64],
        v2: &[f64],
        v3: &[f64],
        config: &NahmConfig,
    ) -> Result<Self> {
        let frame = parallel_frame(spec, x, config.order, config.trust_radius, config.geodesic_steps)?;
        Self::from_frame(&frame, v1, v2, v3)
    }

    /// `max(|tau* B0 - B2|, |tau* B1 + B1|)`.
    pub fn reality_residual(&self) -> f64 {
        let a = self.b0.tau_star().distance(&self.b2);
        let b = self
            .b1
            .tau_star()
            .add(&self.b1)
            .map(|s| s.max_abs())
            .unwrap_or(f64::INFINITY);
        a.max(b)
    }

    pub fn max_abs(&self) -> f64 {
        self.b0.max_abs().max(self.b1.max_abs()).max(self.b2.max_abs())
    }

    /// Largest coefficient difference from another state.
    pub fn distance(&self, other: &NahmState) -> f64 {
        self.b0
            .distance(&other.b0)
            .max(self.b1.distance(&other.b1))
            .max(self.b2.distance(&other.b2))
    }

    fn rhs(&self) -> Result<[JetVectorField; 3]> {
        let half = Complex64::new(0.5, 0.0);
        Ok([
            self.b0.algebra_bracket(&self.b1)?.scale(half),
            self.b0.algebra_bracket(&self.b2)?,
            self.b1.algebra_bracket(&self.b2)?.scale(half),
        ])
    }

    fn shifted(&self, h: f64, k: &[JetVectorField; 3]) -> Result<NahmState> {
        let c = Complex64::new(h, 0.0);
        Ok(NahmState {
            t: self.t + h,
            b0: self.b0.add(&k[0].scale(c))?,
            b1: self.b1.add(&k[1].scale(c))?,
            b2: self.b2.add(&k[2].scale(c))?,
        })
    }
}

/// RK4 for the Nahm system, sampled at every entry of `t_grid` (increasing,
/// starting at the initial time), with `substeps` steps per grid interval.
pub fn nahm_solve(initial: &NahmState, t_grid: &[f64], substeps: usize) -> Result<Vec<NahmState>> {
    if substeps == 0 {
        return Err(Error::Config("substeps must be positive".into()));
    }
    let mut state = initial.clone();
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        let h = (target - state.t) / substeps as f64;
        if h < 0.0 {
            return Err(Error::Config("time grid must be increasing".into()));
        }
        if h > 0.0 {
            for _ in 0..substeps {
                let k1 = state.rhs()?;
                let k2 = state.shifted(0.5 * h, &k1)?.rhs()?;
                let k3 = state.shifted(0.5 * h, &k2)?.rhs()?;
                let k4 = state.shifted(h, &k3)?.rhs()?;
                let mut sum = Vec::with_capacity(3);
                for i in 0..3 {
                    let s = k1[i]
                        .add(&k2[i].scale(Complex64::new(2.0, 0.0)))?
                        .add(&k3[i].scale(Complex64::new(2.0, 0.0)))?
                        .add(&k4[i])?
                        .scale(Complex64::new(1.0 / 6.0, 0.0));
                    sum.push(s);
                }
                let t = state.t + h;
                state = state.shifted(h, &[sum[0].clone(), sum[1].clone(), sum[2].clone()])?;
                state.t = t;
                let m = state.max_abs();
                if !(m <= NAHM_BLOWUP) {
                    return Err(Error::BlowUp {
                        fraction: state.t,
                        magnitude: m,
                    });
                }
            }
        }
        state.t = target;
        out.push(state.clone());
    }
    Ok(out)
}

/// Uniform grid `k / intervals`, `k = 0..=intervals`.
pub fn uniform_grid(intervals: usize) -> Vec<f64> {
    (0..=intervals).map(|k| k as f64 / intervals as f64).collect()
}

/// Observed convergence order of [`nahm_solve`] on `[0, 1]` from runs with
/// `base`, `2 base` and `4 base` steps.
pub fn nahm_convergence_order(initial: &NahmState, base: usize) -> Result<f64> {
    let end =
        |steps: usize| -> Result<NahmState> { Ok(nahm_solve(initial, &[1.0], steps)?.pop().expect("one grid point")) };
    let a = end(base)?;
    let b = end(2 * base)?;
    let c = end(4 * base)?;
    Ok((a.distance(&b) / b.distance(&c)).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NahmConfig {
    pub order: usize,
    pub trust_radius: f64,
    /// Frame RK4 steps on `[0, 1]`; the Nahm states are stored at twice this resolution.
    pub frame_steps: usize,
    /// Steps for the geodesic flows that build parallel fields.
    pub geodesic_steps: usize,
    /// Steps for autonomous field flows.
    pub flow_steps: usize,
}

impl Default for NahmConfig {
    fn default() -> Self {
        NahmConfig {
            order: DEFAULT_ORDER,
            trust_radius: DEFAULT_TRUST_RADIUS,
            frame_steps: DEFAULT_FRAME_STEPS,
            geodesic_steps: crate::geometry::DEFAULT_STEPS,
            flow_steps: DEFAULT_FLOW_STEPS,
        }
    }
}

/// Nahm states on the uniform grid of `2 * frame_steps` intervals.
pub fn nahm_path(initial: &NahmState, frame_steps: usize) -> Result<Vec<NahmState>> {
    let mut grid = uniform_grid(2 * frame_steps);
    grid.remove(0);
    let mut states = vec![initial.clone()];
    states.extend(nahm_solve(initial, &grid, 1)?);
    Ok(states)
}

/// Side of the factorization: `g+` generated by `B1 / 2 + zeta B2`, `g-` by
/// `-B1 / 2 - zeta~ B0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameSide {
    Plus,
    Minus,
}

fn generator(state: &NahmState, side: FrameSide, w: Complex64, p: &[Complex64]) -> Result<Vec<Complex64>> {
    let b1 = state.b1.eval(p)?;
    let other = match side {
        FrameSide::Plus => state.b2.eval(p)?,
        FrameSide::Minus => state.b0.eval(p)?,
    };
    let sign = match side {
        FrameSide::Plus => 1.0,
        FrameSide::Minus => -1.0,
    };
    Ok(b1.iter().zip(&other).map(|(a, b)| (a * 0.5 + b * w) * sign).collect())
}

/// `g(t_end) p` for the frame with `g^-1 g' = C(t)`, i.e. the solution of
/// `q' = C(t_end - s)(q)`, `q(0) = p`. `states` lie on a uniform grid of
/// even length `2m + 1` over `[0, 1]` and `end` is an even grid index.
pub fn frame_apply(
    states: &[NahmState],
    side: FrameSide,
    w: Complex64,
    end: usize,
    p: &[Complex64],
) -> Result<Vec<Complex64>> {
    if states.len() < 3 || states.len().is_multiple_of(2) || !end.is_multiple_of(2) || end >= states.len() {
        return Err(Error::Config(
            "frame integration needs an odd-length grid and an even end index".into(),
        ));
    }
    let intervals = states.len() - 1;
    let h = 2.0 / intervals as f64;
    let mut q = p.to_vec();
    let axpy = |q: &[Complex64], a: f64, k: &[Complex64]| -> Vec<Complex64> {
        q.iter().zip(k).map(|(x, y)| x + y * a).collect()
    };
    let mut idx = end;
    while idx > 0 {
        let (s0, s1, s2) = (&states[idx], &states[idx - 1], &states[idx - 2]);
        let k1 = generator(s0, side, w, &q)?;
        let k2 = generator(s1, side, w, &axpy(&q, 0.5 * h, &k1))?;
        let k3 = generator(s1, side, w, &axpy(&q, 0.5 * h, &k2))?;
        let k4 = generator(s2, side, w, &axpy(&q, h, &k3))?;
        for i in 0..q.len() {
            q[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (h / 6.0);
        }
        idx -= 2;
    }
    Ok(q)
}

/// Frame images of a base point at `t = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameFlow {
    pub zeta: Complex64,
    pub start: Vec<Complex64>,
    /// `g+(1, zeta) start`.
    pub plus: Vec<Complex64>,
    /// `g-(1, 1 / zeta) start`.
    pub minus: Vec<Complex64>,
}

pub fn frame_integrate(states: &[NahmState], zeta: Complex64, start: &[Complex64]) -> Result<FrameFlow> {
    let r = zeta.norm();
    if !(0.5..=2.0).contains(&r) {
        return Err(Error::Twistor(format!("|zeta| = {:.4} outside [1/2, 2]", r)));
    }
    let end = states.len() - 1;
    Ok(FrameFlow {
        zeta,
        start: start.to_vec(),
        plus: frame_apply(states, FrameSide::Plus, zeta, end, start)?,
        minus: frame_apply(states, FrameSide::Minus, zeta.inv(), end, start)?,
    })
}

/// `beta(zeta) = B0(0) + zeta B1(0) + zeta^2 B2(0)`, a parallel field.
pub fn beta_field(initial: &NahmState, zeta: Complex64) -> Result<JetVectorField> {
    initial
        .b0
        .add(&initial.b1.scale(zeta))?
        .add(&initial.b2.scale(zeta * zeta))
}

/// `max_t |e^{-t beta(zeta) / zeta} g+(t, zeta) x - g-(t, 1 / zeta) x|` over
/// the even grid times listed in `ends`.
pub fn riemann_hilbert_residual(
    states: &[NahmState],
    zeta: Complex64,
    x: &[Complex64],
    ends: &[usize],
    flow_steps: usize,
) -> Result<f64> {
    let field = beta_field(&states[0], zeta)?.scale(-zeta.inv());
    let intervals = (states.len() - 1) as f64;
    let mut worst: f64 = 0.0;
    for &end in ends {
        let t = end as f64 / intervals;
        let plus = frame_apply(states, FrameSide::Plus, zeta, end, x)?;
        let minus = frame_apply(states, FrameSide::Minus, zeta.inv(), end, x)?;
        let moved = flow_field(&field, t, &plus, flow_steps)?;
        worst = worst.max(max_diff(&moved, &minus));
    }
    Ok(worst)
}

/// Largest reality defect along a Nahm path.
pub fn path_reality_residual(states: &[NahmState]) -> f64 {
    states.iter().map(|s| s.reality_residual()).fold(0.0, f64::max)
}

/// The section `zeta -> (beta(zeta) at y+, y+ = g+(1, zeta) x, zeta)`,
/// `zeta~ -> (zeta~^2 beta(1 / zeta~) at y-, y- = g-(1, zeta~) x, zeta~)`.
pub fn nahm_section(
    spec: &ManifoldSpec,
    x: &[f64],
    v1: &[f64],
    v2: &[f64],
    v3: &[f64],
    config: &NahmConfig,
) -> Result<Section> {
    let initial = NahmState::initial(spec, x, v1, v2, v3, config)?;
    let states = Arc::new(nahm_path(&initial, config.frame_steps)?);
    let base = to_complex(x);
    let kind = SectionKind::NahmSection {
        x: x.to_vec(),
        v1: v1.to_vec(),
        v2: v2.to_vec(),
        v3: v3.to_vec(),
    };
    Ok(Section::new(kind, move |patch, zeta| {
        let end = states.len() - 1;
        let init = &states[0];
        let (side, field) = match patch {
            Patch::Zero => (FrameSide::Plus, beta_field(init, zeta)?),
            Patch::Infinity => {
                let f = init.b0.scale(zeta * zeta).add(&init.b1.scale(zeta))?.add(&init.b2)?;
                (FrameSide::Minus, f)
            }
        };
        let y = frame_apply(&states, side, zeta, end, &base)?;
        let beta = field.eval(&y)?;
        Ok(TwistorPoint::new(patch, y, beta, zeta))
    }))
}

/// Singular values of the differential of `(x, V1, V2, V3) -> section`,
/// sampled on `zeta_grid` in the zero patch, at `V = 0` (central differences).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub singular_values: Vec<f64>,
    pub rank: usize,
    pub expected: usize,
    /// The `expected`-th singular value over the largest.
    pub ratio: f64,
}

pub fn section_family_rank(
    spec: &ManifoldSpec,
    x: &[f64],
    zeta_grid: &[Complex64],
    h: f64,
    config: &NahmConfig,
) -> Result<RankReport> {
    let n = spec.dim;
    let params = 4 * n;
    let sample = |theta: &[f64]| -> Result<Vec<f64>> {
        let s = nahm_section(
            spec,
            &theta[..n],
            &theta[n..2 * n],
            &theta[2 * n..3 * n],
            &theta[3 * n..],
            config,
        )?;
        let mut out = Vec::new();
        for &z in zeta_grid {
            let p = s.eval(Patch::Zero, z)?;
            for c in p.y.iter().chain(&p.beta) {
                out.push(c.re);
                out.push(c.im);
            }
        }
        Ok(out)
    };
    let mut theta0 = x.to_vec();
    theta0.resize(params, 0.0);
    let mut cols = Vec::with_capacity(params);
    for k in 0..params {
        let mut plus = theta0.clone();
        let mut minus = theta0.clone();
        plus[k] += h;
        minus[k] -= h;
        let a = sample(&plus)?;
        let b = sample(&minus)?;
        cols.push(a.iter().zip(&b).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>());
    }
    let rows = cols[0].len();
    let m = DMatrix::from_fn(rows, params, |r, c| cols[c][r]);
    let mut sv: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > crate::twistor::RANK_TOL * top).count();
    let ratio = if top > 0.0 && sv.len() >= params {
        sv[params - 1] / top
    } else {
        0.0
    };
    Ok(RankReport {
        singular_values: sv,
        rank,
        expected: params,
        ratio,
    })
}

#[cfg(test)]
mod tests;
