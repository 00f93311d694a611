//! Two-patch twistor space: gluing by the complex geodesic flow, the
//! normal bundle of sections, the Moebius action and the real structure.
//!
//! A point in the zero patch is `(y, beta, zeta)`; a point in the infinity
//! patch is `(y~, beta~, zeta~)` with `zeta~ = 1 / zeta` on the overlap.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::adapted::TangentPoint;
use crate::error::{Error, Result};
use crate::geometry::{exp_c_differential, geodesic_flow, max_diff, to_complex, ManifoldSpec, PhaseState};

/// Patch coordinates satisfy `|zeta| <= PATCH_RADIUS`.
pub const PATCH_RADIUS: f64 = 2.0;
/// Default polynomial degree cap for normal-bundle sections.
pub const DEGREE_CAP: usize = 6;
/// Relative singular-value cutoff for rank decisions.
pub const RANK_TOL: f64 = 1e-8;
/// Relative singular values inside `(MARGINAL_LOW, MARGINAL_HIGH)` make a
/// rank decision ambiguous.
pub const MARGINAL_LOW: f64 = 1e-11;
pub const MARGINAL_HIGH: f64 = 1e-5;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Patch {
    Zero,
    Infinity,
}

impl Patch {
    pub fn other(self) -> Patch {
        match self {
            Patch::Zero => Patch::Infinity,
            Patch::Infinity => Patch::Zero,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistorPoint {
    pub patch: Patch,
    pub y: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    pub zeta: Complex64,
}

impl TwistorPoint {
    pub fn new(patch: Patch, y: Vec<Complex64>, beta: Vec<Complex64>, zeta: Complex64) -> Self {
        TwistorPoint { patch, y, beta, zeta }
    }

    /// Max-norm distance; points in different patches are infinitely apart.
    pub fn distance(&self, other: &TwistorPoint) -> f64 {
        if self.patch != other.patch || self.y.len() != other.y.len() {
            return f64::INFINITY;
        }
        max_diff(&self.y, &other.y)
            .max(max_diff(&self.beta, &other.beta))
            .max((self.zeta - other.zeta).norm())
    }

    fn check_patch(&self, spec: &ManifoldSpec) -> Result<()> {
        if self.y.len() != spec.dim || self.beta.len() != spec.dim {
            return Err(Error::Structure(format!(
                "twistor point has lengths ({}, {}), dimension is {}",
                self.y.len(),
                self.beta.len(),
                spec.dim
            )));
        }
        if !(self.zeta.norm() <= PATCH_RADIUS) {
            return Err(Error::Twistor(format!(
                "|zeta| = {:.4} exceeds the patch radius {}",
                self.zeta.norm(),
                PATCH_RADIUS
            )));
        }
        Ok(())
    }

    fn check_overlap(&self) -> Result<()> {
        let r = self.zeta.norm();
        if !(r > 1.0 / PATCH_RADIUS && r < PATCH_RADIUS) {
            return Err(Error::Twistor(format!(
                "|zeta| = {:.4} is outside the overlap annulus",
                r
            )));
        }
        Ok(())
    }
}

/// Zero patch to infinity patch: `y~ = y(z)`, `beta~ = zeta^-2 beta(z)` for
/// the geodesic flow from `(y, beta)` to complex time `z = -1 / zeta`.
pub fn transition(spec: &ManifoldSpec, tp: &TwistorPoint, steps: usize) -> Result<TwistorPoint> {
    if tp.patch != Patch::Zero {
        return Err(Error::Twistor("transition expects a zero-patch point".into()));
    }
    tp.check_patch(spec)?;
    tp.check_overlap()?;
    let zeta = tp.zeta;
    let st = geodesic_flow(
        spec,
        &PhaseState::new(tp.y.clone(), tp.beta.clone()),
        -zeta.inv(),
        steps,
    )?;
    let w = zeta.inv() * zeta.inv();
    Ok(TwistorPoint::new(
        Patch::Infinity,
        st.y,
        st.beta.iter().map(|b| b * w).collect(),
        zeta.inv(),
    ))
}

/// Inverse of [`transition`]: flow from `(y~, beta~ / zeta~^2)` for time `zeta~`.
pub fn transition_inverse(spec: &ManifoldSpec, tp: &TwistorPoint, steps: usize) -> Result<TwistorPoint> {
    if tp.patch != Patch::Infinity {
        return Err(Error::Twistor(
            "inverse transition expects an infinity-patch point".into(),
        ));
    }
    tp.check_patch(spec)?;
    tp.check_overlap()?;
    let zt = tp.zeta;
    let w = zt.inv() * zt.inv();
    let start = PhaseState::new(tp.y.clone(), tp.beta.iter().map(|b| b * w).collect());
    let st = geodesic_flow(spec, &start, zt, steps)?;
    Ok(TwistorPoint::new(Patch::Zero, st.y, st.beta, zt.inv()))
}

/// Express `tp` in the requested patch.
pub fn to_patch(spec: &ManifoldSpec, tp: &TwistorPoint, patch: Patch, steps: usize) -> Result<TwistorPoint> {
    match (tp.patch, patch) {
        (a, b) if a == b => Ok(tp.clone()),
        (Patch::Zero, Patch::Infinity) => transition(spec, tp, steps),
        _ => transition_inverse(spec, tp, steps),
    }
}

/// The real structure, covering `zeta -> -1 / conj(zeta)`. It swaps patches:
/// `(y, beta, zeta)` in one patch goes to `(conj y, conj beta, -conj zeta)`
/// in the other, so it is defined on both patches including their centers.
pub fn real_structure(spec: &ManifoldSpec, tp: &TwistorPoint) -> Result<TwistorPoint> {
    tp.check_patch(spec)?;
    Ok(TwistorPoint::new(
        tp.patch.other(),
        tp.y.iter().map(|c| c.conj()).collect(),
        tp.beta.iter().map(|c| c.conj()).collect(),
        -tp.zeta.conj(),
    ))
}

/// Element of `SL(2, C)` acting on the `zeta` line by `(a zeta + b) / (c zeta + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moebius {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl Moebius {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let m = Moebius { a, b, c, d };
        if (m.det() - ONE).norm() > 1e-12 {
            return Err(Error::Config(format!("determinant {} is not 1", m.det())));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        Moebius {
            a: ONE,
            b: ZERO,
            c: ZERO,
            d: ONE,
        }
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    /// `self * other`, acting as `other` first.
    pub fn compose(&self, other: &Moebius) -> Moebius {
        Moebius {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> Moebius {
        Moebius {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn apply(&self, zeta: Complex64) -> Result<Complex64> {
        let den = self.c * zeta + self.d;
        if den.norm() < 1e-14 {
            return Err(Error::Twistor(format!(
                "pole of the fractional transformation at zeta = {}",
                zeta
            )));
        }
        Ok((self.a * zeta + self.b) / den)
    }

    /// The rotation `exp(theta (n . i sigma) / 2)` of `SU(2)`.
    pub fn su2(axis: [f64; 3], theta: f64) -> Moebius {
        let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (nx, ny, nz) = (axis[0] / norm, axis[1] / norm, axis[2] / norm);
        let (s, c) = (0.5 * theta).sin_cos();
        Moebius {
            a: Complex64::new(c, s * nz),
            b: Complex64::new(s * ny, s * nx),
            c: Complex64::new(-s * ny, s * nx),
            d: Complex64::new(c, -s * nz),
        }
    }
}

/// Action on zero-patch points: the point moves along its geodesic to time
/// `s = -c / (c zeta + d)` and the transported velocity is scaled by
/// `(c zeta + d)^-2`.
pub fn moebius_action(spec: &ManifoldSpec, g: &Moebius, tp: &TwistorPoint, steps: usize) -> Result<TwistorPoint> {
    if tp.patch != Patch::Zero {
        return Err(Error::Twistor(
            "the Moebius action is implemented on the zero patch".into(),
        ));
    }
    tp.check_patch(spec)?;
    let den = g.c * tp.zeta + g.d;
    let zeta = g.apply(tp.zeta)?;
    let st = geodesic_flow(spec, &PhaseState::new(tp.y.clone(), tp.beta.clone()), -g.c / den, steps)?;
    let w = (den * den).inv();
    let out = TwistorPoint::new(Patch::Zero, st.y, st.beta.iter().map(|b| b * w).collect(), zeta);
    out.check_patch(spec)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionKind {
    PointSection {
        point: TangentPoint,
    },
    NahmSection {
        x: Vec<f64>,
        v1: Vec<f64>,
        v2: Vec<f64>,
        v3: Vec<f64>,
    },
    Sampled,
    Custom {
        label: String,
    },
}

type Evaluator = dyn Fn(Patch, Complex64) -> Result<TwistorPoint> + Send + Sync;

/// A holomorphic section of the twistor fibration, given by its value in
/// each patch.
#[derive(Clone)]
pub struct Section {
    pub kind: SectionKind,
    evaluator: Arc<Evaluator>,
}

impl fmt::Debug for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Section")
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

/// Section values on a `zeta` grid in both patches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSection {
    pub source: SectionKind,
    pub zero: Vec<TwistorPoint>,
    pub infinity: Vec<TwistorPoint>,
}

impl Section {
    pub fn new<F>(kind: SectionKind, f: F) -> Self
    where
        F: Fn(Patch, Complex64) -> Result<TwistorPoint> + Send + Sync + 'static,
    {
        Section {
            kind,
            evaluator: Arc::new(f),
        }
    }

    pub fn eval(&self, patch: Patch, zeta: Complex64) -> Result<TwistorPoint> {
        if !(zeta.norm() <= PATCH_RADIUS) {
            return Err(Error::Twistor(format!(
                "|zeta| = {:.4} exceeds the patch radius",
                zeta.norm()
            )));
        }
        (self.evaluator)(patch, zeta)
    }

    pub fn sample(&self, grid: &[Complex64]) -> Result<SampledSection> {
        Ok(SampledSection {
            source: self.kind.clone(),
            zero: grid.iter().map(|&z| self.eval(Patch::Zero, z)).collect::<Result<_>>()?,
            infinity: grid
                .iter()
                .map(|&z| self.eval(Patch::Infinity, z))
                .collect::<Result<_>>()?,
        })
    }

    /// A section that only knows its values on a grid.
    pub fn from_samples(samples: SampledSection) -> Self {
        let data = Arc::new(samples);
        Section::new(SectionKind::Sampled, move |patch, zeta| {
            let list = match patch {
                Patch::Zero => &data.zero,
                Patch::Infinity => &data.infinity,
            };
            list.iter()
                .find(|p| (p.zeta - zeta).norm() < 1e-12)
                .cloned()
                .ok_or_else(|| Error::Twistor(format!("sampled section has no value at zeta = {}", zeta)))
        })
    }

    /// The same section with every zero-patch `beta` multiplied by `factor`.
    pub fn scale_zero_beta(&self, factor: f64) -> Section {
        let inner = self.clone();
        Section::new(
            SectionKind::Custom {
                label: format!("zero-patch beta scaled by {}", factor),
            },
            move |patch, zeta| {
                let mut p = inner.eval(patch, zeta)?;
                if patch == Patch::Zero {
                    p.beta.iter_mut().for_each(|b| *b *= factor);
                }
                Ok(p)
            },
        )
    }
}

/// Data of the section attached to a point `m = exp^C_x(i v)`: the complex
/// geodesic `gamma(t)` from `(x, i v)` and its velocities at `t = 1, -1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointSectionData {
    pub m: Vec<Complex64>,
    pub m_conj: Vec<Complex64>,
    pub velocity: Vec<Complex64>,
    pub velocity_back: Vec<Complex64>,
}

pub fn point_section_data(spec: &ManifoldSpec, p: &TangentPoint, steps: usize) -> Result<PointSectionData> {
    if p.x.len() != spec.dim || p.v.len() != spec.dim {
        return Err(Error::Structure("tangent point dimension mismatch".into()));
    }
    let iv: Vec<Complex64> = p.v.iter().map(|&a| Complex64::new(0.0, a)).collect();
    let start = PhaseState::new(to_complex(&p.x), iv);
    let fwd = geodesic_flow(spec, &start, ONE, steps)?;
    let back = geodesic_flow(spec, &start, -ONE, steps)?;
    Ok(PointSectionData {
        m: fwd.y,
        m_conj: back.y,
        velocity: fwd.beta,
        velocity_back: back.beta,
    })
}

/// The real section `zeta -> (m, 2 zeta V)`, `zeta~ -> (tau m, 2 zeta~ V~)`.
pub fn point_section(spec: &ManifoldSpec, p: &TangentPoint, steps: usize) -> Result<Section> {
    let data = point_section_data(spec, p, steps)?;
    Ok(Section::new(
        SectionKind::PointSection { point: p.clone() },
        move |patch, zeta| {
            let (y, v) = match patch {
                Patch::Zero => (&data.m, &data.velocity),
                Patch::Infinity => (&data.m_conj, &data.velocity_back),
            };
            Ok(TwistorPoint::new(
                patch,
                y.clone(),
                v.iter().map(|b| b * zeta * 2.0).collect(),
                zeta,
            ))
        },
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionResiduals {
    pub gluing: f64,
    pub reality: f64,
}

/// Gluing defect over the overlap points of `zeta_grid` and reality defect
/// over all of it (both patches). Evaluation failures count as infinite.
pub fn section_residuals(spec: &ManifoldSpec, s: &Section, zeta_grid: &[Complex64], steps: usize) -> SectionResiduals {
    let mut gluing: f64 = 0.0;
    let mut reality: f64 = 0.0;
    let fail = |r: Result<f64>| r.unwrap_or(f64::INFINITY);
    for &zeta in zeta_grid {
        let r = zeta.norm();
        if r > 1.0 / PATCH_RADIUS && r < PATCH_RADIUS {
            gluing = gluing.max(fail((|| {
                let moved = transition(spec, &s.eval(Patch::Zero, zeta)?, steps)?;
                Ok(moved.distance(&s.eval(Patch::Infinity, zeta.inv())?))
            })()));
        }
        for patch in [Patch::Zero, Patch::Infinity] {
            reality = reality.max(fail((|| {
                let image = real_structure(spec, &s.eval(patch, zeta)?)?;
                Ok(image.distance(&s.eval(patch.other(), -zeta.conj())?))
            })()));
        }
    }
    SectionResiduals { gluing, reality }
}

/// Reality defect of the rotated section `zeta -> g . s(g^-1 zeta)` on grid
/// points of the overlap, comparing the real structure with the gluing.
pub fn rotated_reality_residual(
    spec: &ManifoldSpec,
    s: &Section,
    g: &Moebius,
    zeta_grid: &[Complex64],
    steps: usize,
) -> Result<f64> {
    let ginv = g.inverse();
    let rotated = |zeta: Complex64| -> Result<TwistorPoint> {
        let pre = ginv.apply(zeta)?;
        moebius_action(spec, g, &s.eval(Patch::Zero, pre)?, steps)
    };
    let mut worst: f64 = 0.0;
    for &zeta in zeta_grid {
        let image = real_structure(spec, &rotated(zeta)?)?;
        let antipode = -zeta.conj().inv();
        let glued = transition(spec, &rotated(antipode)?, steps)?;
        worst = worst.max(image.distance(&glued));
    }
    Ok(worst)
}

/// Points `radius * e^{2 pi i k / count}` (offset by half a step so no grid
/// point is real).
pub fn circle_grid(radius: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| Complex64::from_polar(radius, std::f64::consts::TAU * (k as f64 + 0.5) / count as f64))
        .collect()
}

/// Transition of a rank-`2n` bundle over the projective line, as a Laurent
/// polynomial in `zeta`, twisted by `zeta^-twist`. Fibre coordinates are
/// ordered `(dy, dbeta)`; a section is a pair of polynomials `s0(zeta)`,
/// `s_inf(zeta~)` with `s_inf(1 / zeta) = zeta^-twist T(zeta) s0(zeta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalBundleModel {
    pub n: usize,
    pub twist: i32,
    /// `(exponent, coefficient)` pairs of the untwisted transition.
    pub laurent: Vec<(i32, DMatrix<Complex64>)>,
}

impl NormalBundleModel {
    /// Linearized gluing along a constant section: `dy~ = dy - dbeta / zeta`,
    /// `dbeta~ = dbeta / zeta^2`.
    pub fn point_of_x(n: usize, twist: i32) -> Self {
        let id = DMatrix::<Complex64>::identity(n, n);
        let block = |tl: Complex64, tr: Complex64, bl: Complex64, br: Complex64| {
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            m.view_mut((0, 0), (n, n)).copy_from(&(&id * tl));
            m.view_mut((0, n), (n, n)).copy_from(&(&id * tr));
            m.view_mut((n, 0), (n, n)).copy_from(&(&id * bl));
            m.view_mut((n, n), (n, n)).copy_from(&(&id * br));
            m
        };
        NormalBundleModel {
            n,
            twist,
            laurent: vec![
                (0, block(ONE, ZERO, ZERO, ZERO)),
                (-1, block(ZERO, -ONE, ZERO, ZERO)),
                (-2, block(ZERO, ZERO, ZERO, ONE)),
            ],
        }
    }

    /// `O(a_1) + ... + O(a_r)` as a diagonal transition `zeta^-a_i`.
    pub fn split(degrees: &[i32], twist: i32) -> Self {
        let r = degrees.len();
        let laurent = degrees
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let mut m = DMatrix::zeros(r, r);
                m[(i, i)] = ONE;
                (-a, m)
            })
            .collect();
        NormalBundleModel {
            n: r / 2,
            twist,
            laurent,
        }
    }

    /// The linearized transition at the constant section through `x`, read off
    /// the flow differential at `count` points of the unit circle and
    /// converted to Laurent coefficients by a discrete Fourier transform.
    pub fn from_geometry(spec: &ManifoldSpec, x: &[f64], twist: i32, count: usize, steps: usize) -> Result<Self> {
        let n = spec.dim;
        let y = to_complex(x);
        let zero = vec![ZERO; n];
        let samples: Vec<(Complex64, DMatrix<Complex64>)> = (0..count)
            .map(|k| {
                let zeta = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / count as f64);
                let mut t = exp_c_differential(spec, &y, &zero, -zeta.inv(), steps)?.matrix;
                let w = zeta.inv() * zeta.inv();
                for r in n..2 * n {
                    for c in 0..2 * n {
                        t[(r, c)] *= w;
                    }
                }
                Ok((zeta, t))
            })
            .collect::<Result<_>>()?;
        let half = (count / 2) as i32;
        let mut laurent = Vec::new();
        for e in -half + 1..half {
            let mut coeff = DMatrix::zeros(2 * n, 2 * n);
            for (zeta, t) in &samples {
                coeff += t * zeta.powi(-e);
            }
            coeff /= Complex64::new(count as f64, 0.0);
            let coeff = coeff.map(|c| {
                Complex64::new(
                    if c.re.abs() < 1e-12 { 0.0 } else { c.re },
                    if c.im.abs() < 1e-12 { 0.0 } else { c.im },
                )
            });
            if coeff.iter().any(|c| c.norm() > 0.0) {
                laurent.push((e, coeff));
            }
        }
        Ok(NormalBundleModel { n, twist, laurent })
    }

    pub fn rank(&self) -> usize {
        self.laurent.first().map(|(_, m)| m.nrows()).unwrap_or(0)
    }

    /// The twisted transition at `zeta`.
    pub fn transition_at(&self, zeta: Complex64) -> DMatrix<Complex64> {
        let r = self.rank();
        let mut m = DMatrix::zeros(r, r);
        for (e, c) in &self.laurent {
            m += c * zeta.powi(*e - self.twist);
        }
        m
    }
}

/// Kernel dimension of `m` with relative cutoff [`RANK_TOL`]; singular values
/// in the marginal band are an error.
pub fn kernel_dimension(m: &DMatrix<Complex64>) -> Result<usize> {
    if m.nrows() == 0 {
        return Ok(m.ncols());
    }
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.max();
    if top == 0.0 {
        return Ok(m.ncols());
    }
    let mut rank = 0;
    for &s in sv.iter() {
        let rel = s / top;
        if rel > MARGINAL_LOW && rel < MARGINAL_HIGH {
            return Err(Error::MarginalRank { value: rel });
        }
        if rel > RANK_TOL {
            rank += 1;
        }
    }
    Ok(m.ncols() - rank)
}

/// Dimension of the space of global holomorphic sections, with `s0` of
/// degree at most `degree_cap`.
pub fn normal_bundle_h0_capped(model: &NormalBundleModel, degree_cap: usize) -> Result<usize> {
    let r = model.rank();
    if r == 0 {
        return Err(Error::Structure("empty normal bundle model".into()));
    }
    let max_e = model.laurent.iter().map(|(e, _)| *e).max().unwrap_or(0) - model.twist;
    let top_power = degree_cap as i32 + max_e;
    let rows = if top_power > 0 { top_power as usize } else { 0 };
    let unknowns = (degree_cap + 1) * r;
    let mut sys = DMatrix::<Complex64>::zeros(rows * r, unknowns);
    for (e, c) in &model.laurent {
        for j in 0..=degree_cap {
            let p = j as i32 + e - model.twist;
            if p >= 1 {
                let row = (p - 1) as usize * r;
                let mut target = sys.view_mut((row, j * r), (r, r));
                target += c;
            }
        }
    }
    kernel_dimension(&sys)
}

pub fn normal_bundle_h0(model: &NormalBundleModel) -> Result<usize> {
    normal_bundle_h0_capped(model, DEGREE_CAP)
}

/// `h0` for twists `0, -1, -2`.
pub fn h0_profile(n: usize) -> Result<[usize; 3]> {
    Ok([
        normal_bundle_h0(&NormalBundleModel::point_of_x(n, 0))?,
        normal_bundle_h0(&NormalBundleModel::point_of_x(n, -1))?,
        normal_bundle_h0(&NormalBundleModel::point_of_x(n, -2))?,
    ])
}
