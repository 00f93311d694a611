//! Truncated multivariate power series with complex coefficients.
//!
//! Coefficients are stored densely, one slot per monomial of total degree
//! `<= order`, in graded order (all degree-0 monomials, then degree 1, ...).
//! Within a degree the exponents are ordered lexicographically with the first
//! variable most significant, so the degree-1 block is `x0, x1, ..., x{n-1}`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Inner constant terms (and similar "must be zero" checks) are accepted up to
/// this magnitude so that round-off from numerical pipelines is tolerated.
pub const ZERO_TERM_TOL: f64 = 1e-12;

/// Monomial table shared by all jets with the same `(num_vars, order)`.
#[derive(Debug)]
pub struct Layout {
    num_vars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    degrees: Vec<usize>,
    index: HashMap<Vec<u8>, usize>,
    products: OnceLock<Vec<(u32, u32, u32)>>,
}

type LayoutCache = HashMap<(usize, usize), Arc<Layout>>;

impl Layout {
    fn build(num_vars: usize, order: usize) -> Self {
        let mut monomials = Vec::new();
        let mut degrees = Vec::new();
        for deg in 0..=order {
            let mut block = Vec::new();
            let mut current = vec![0u8; num_vars];
            push_compositions(&mut block, &mut current, 0, deg);
            for m in block {
                monomials.push(m);
                degrees.push(deg);
            }
        }
        let index = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Layout {
            num_vars,
            order,
            monomials,
            degrees,
            index,
            products: OnceLock::new(),
        }
    }

    /// Shared layout for the given shape.
    pub fn get(num_vars: usize, order: usize) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<LayoutCache>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((num_vars, order))
            .or_insert_with(|| Arc::new(Layout::build(num_vars, order)))
            .clone()
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomial(&self, i: usize) -> &[u8] {
        &self.monomials[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    pub fn index_of(&self, exps: &[u8]) -> Option<usize> {
        self.index.get(exps).copied()
    }

    /// All `(i, j, k)` with `mono[i] * mono[j] = mono[k]` and degree within order.
    fn products(&self) -> &[(u32, u32, u32)] {
        self.products.get_or_init(|| {
            let mut out = Vec::new();
            let mut buf = vec![0u8; self.num_vars];
            for i in 0..self.len() {
                for j in 0..self.len() {
                    if self.degrees[i] + self.degrees[j] > self.order {
                        continue;
                    }
                    for v in 0..self.num_vars {
                        buf[v] = self.monomials[i][v] + self.monomials[j][v];
                    }
                    let k = self.index[&buf];
                    out.push((i as u32, j as u32, k as u32));
                }
            }
            out
        })
    }
}

/// Exponent vectors of fixed total degree, first variable most significant.
fn push_compositions(out: &mut Vec<Vec<u8>>, current: &mut [u8], var: usize, remaining: usize) {
    if current.is_empty() {
        if remaining == 0 {
            out.push(Vec::new());
        }
        return;
    }
    if var == current.len() - 1 {
        current[var] = remaining as u8;
        out.push(current.to_vec());
        current[var] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_compositions(out, current, var + 1, remaining - e);
    }
    current[var] = 0;
}

/// A truncated power series in `num_vars` variables, exact through `order`.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = f.debug_map();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() != 0.0 {
                terms.entry(&self.layout.monomial(i), c);
            }
        }
        terms.finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.same_shape(other) && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn zero(num_vars: usize, order: usize) -> Self {
        let layout = Layout::get(num_vars, order);
        let coeffs = vec![Complex64::new(0.0, 0.0); layout.len()];
        Jet { layout, coeffs }
    }

    pub fn constant(num_vars: usize, order: usize, c: Complex64) -> Self {
        let mut j = Jet::zero(num_vars, order);
        j.coeffs[0] = c;
        j
    }

    /// `c + x_var`: the seed for differentiating with respect to `var` at `c`.
    pub fn variable(num_vars: usize, order: usize, var: usize, c: Complex64) -> Self {
        assert!(var < num_vars, "variable index out of range");
        let mut j = Jet::constant(num_vars, order, c);
        if order >= 1 {
            j.coeffs[1 + var] = Complex64::new(1.0, 0.0);
        }
        j
    }

    /// Builds a jet from `(exponents, coefficient)` pairs; terms above the
    /// order are dropped.
    pub fn from_terms(num_vars: usize, order: usize, terms: &[(Vec<u8>, Complex64)]) -> Result<Self> {
        let mut j = Jet::zero(num_vars, order);
        for (exps, c) in terms {
            if exps.len() != num_vars {
                return Err(Error::Structure(format!(
                    "monomial {:?} has {} exponents, expected {}",
                    exps,
                    exps.len(),
                    num_vars
                )));
            }
            if let Some(i) = j.layout.index_of(exps) {
                j.coeffs[i] += c;
            }
        }
        Ok(j)
    }

    pub fn from_coeffs(num_vars: usize, order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let layout = Layout::get(num_vars, order);
        if coeffs.len() != layout.len() {
            return Err(Error::Structure(format!(
                "expected {} coefficients, got {}",
                layout.len(),
                coeffs.len()
            )));
        }
        Ok(Jet { layout, coeffs })
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of the monomial with the given exponents (zero if above order).
    pub fn coeff(&self, exps: &[u8]) -> Complex64 {
        self.layout.index_of(exps).map(|i| self.coeffs[i]).unwrap_or_default()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Coefficient of `x_var`.
    pub fn linear_coeff(&self, var: usize) -> Complex64 {
        if self.order() == 0 {
            Complex64::default()
        } else {
            self.coeffs[1 + var]
        }
    }

    pub fn same_shape(&self, other: &Jet) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout)
            || (self.num_vars() == other.num_vars() && self.order() == other.order())
    }

    fn check_shape(&self, other: &Jet) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "jet shapes differ: ({} vars, order {}) vs ({} vars, order {})",
                self.num_vars(),
                self.order(),
                other.num_vars(),
                other.order()
            )))
        }
    }

    pub fn constant_like(&self, c: Complex64) -> Jet {
        let mut j = Jet {
            layout: self.layout.clone(),
            coeffs: vec![Complex64::default(); self.coeffs.len()],
        };
        j.coeffs[0] = c;
        j
    }

    pub fn scale(&self, c: Complex64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn conj(&self) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    /// Cauchy product truncated at the common order.
    pub fn checked_mul(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        let mut out = vec![Complex64::default(); self.coeffs.len()];
        for &(i, j, k) in self.layout.products() {
            let a = self.coeffs[i as usize];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            out[k as usize] += a * other.coeffs[j as usize];
        }
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs: out,
        })
    }

    fn zip(&self, other: &Jet, f: impl Fn(Complex64, Complex64) -> Complex64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    /// The jet with its constant term removed.
    pub fn nonconstant_part(&self) -> Jet {
        let mut h = self.clone();
        h.coeffs[0] = Complex64::default();
        h
    }

    /// `sum_k weights[k] * h^k` with `h` the nonconstant part; `weights` has
    /// `order + 1` entries. This is the Taylor recipe used by every
    /// elementary function.
    fn compose_taylor(&self, weights: &[Complex64]) -> Jet {
        let h = self.nonconstant_part();
        let mut out = self.constant_like(weights[0]);
        let mut power = self.constant_like(Complex64::new(1.0, 0.0));
        for w in weights.iter().skip(1) {
            power = &power * &h;
            if w.norm() != 0.0 {
                out = &out + &power.scale(*w);
            }
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let a = self.constant_term().exp();
        let weights: Vec<Complex64> = (0..=self.order()).map(|k| a / factorial(k)).collect();
        self.compose_taylor(&weights)
    }

    pub fn sin(&self) -> Jet {
        let a = self.constant_term();
        let (s, c) = (a.sin(), a.cos());
        let weights: Vec<Complex64> = (0..=self.order())
            .map(|k| {
                let d = match k % 4 {
                    0 => s,
                    1 => c,
                    2 => -s,
                    _ => -c,
                };
                d / factorial(k)
            })
            .collect();
        self.compose_taylor(&weights)
    }

    pub fn cos(&self) -> Jet {
        let a = self.constant_term();
        let (s, c) = (a.sin(), a.cos());
        let weights: Vec<Complex64> = (0..=self.order())
            .map(|k| {
                let d = match k % 4 {
                    0 => c,
                    1 => -s,
                    2 => -c,
                    _ => s,
                };
                d / factorial(k)
            })
            .collect();
        self.compose_taylor(&weights)
    }

    /// `1 / self`; the constant term must be nonzero.
    pub fn recip(&self) -> Result<Jet> {
        let a = self.constant_term();
        if a.norm() == 0.0 {
            return Err(Error::Domain("division by a jet with zero constant term".into()));
        }
        let inv = a.inv();
        let mut w = inv;
        let weights: Vec<Complex64> = (0..=self.order())
            .map(|_| {
                let cur = w;
                w = -w * inv;
                cur
            })
            .collect();
        Ok(self.compose_taylor(&weights))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        self.check_shape(other)?;
        Ok(self * &other.recip()?)
    }

    pub fn powi(&self, k: i32) -> Result<Jet> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut result = self.constant_like(Complex64::new(1.0, 0.0));
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// Partial derivative with respect to `var`. The top-degree slots of the
    /// result are zero: the derivative is exact only through `order - 1`.
    pub fn derivative(&self, var: usize) -> Jet {
        let mut out = vec![Complex64::default(); self.coeffs.len()];
        let mut buf = vec![0u8; self.num_vars()];
        for (i, c) in self.coeffs.iter().enumerate() {
            let m = self.layout.monomial(i);
            if m[var] == 0 || c.norm() == 0.0 {
                continue;
            }
            buf.copy_from_slice(m);
            buf[var] -= 1;
            let k = self.layout.index_of(&buf).expect("lower monomial present");
            out[k] += c * m[var] as f64;
        }
        Jet {
            layout: self.layout.clone(),
            coeffs: out,
        }
    }

    /// Evaluates the polynomial at a point (offsets from the expansion point).
    pub fn eval(&self, point: &[Complex64]) -> Result<Complex64> {
        if point.len() != self.num_vars() {
            return Err(Error::Structure(format!(
                "evaluation point has {} coordinates, jet has {} variables",
                point.len(),
                self.num_vars()
            )));
        }
        let k = self.order();
        let powers: Vec<Vec<Complex64>> = point
            .iter()
            .map(|&p| {
                let mut v = Vec::with_capacity(k + 1);
                let mut acc = Complex64::new(1.0, 0.0);
                for _ in 0..=k {
                    v.push(acc);
                    acc *= p;
                }
                v
            })
            .collect();
        let mut sum = Complex64::default();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            let m = self.layout.monomial(i);
            let mut term = *c;
            for (v, &e) in m.iter().enumerate() {
                term *= powers[v][e as usize];
            }
            sum += term;
        }
        Ok(sum)
    }

    /// Gradient of the polynomial at a point.
    pub fn eval_gradient(&self, point: &[Complex64]) -> Result<Vec<Complex64>> {
        (0..self.num_vars()).map(|v| self.derivative(v).eval(point)).collect()
    }

    /// Same coefficients, re-truncated (or zero-padded) to a different order.
    pub fn with_order(&self, order: usize) -> Jet {
        let mut out = Jet::zero(self.num_vars(), order);
        for (i, c) in self.coeffs.iter().enumerate() {
            if let Some(k) = out.layout.index_of(self.layout.monomial(i)) {
                out.coeffs[k] = *c;
            }
        }
        out
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Formal composition `outer(inner_0, ..., inner_{m-1})`, truncated at the
/// order of the inner jets. Every inner jet must have zero constant term.
pub fn compose(outer: &Jet, inner: &[Jet]) -> Result<Jet> {
    if inner.len() != outer.num_vars() {
        return Err(Error::Structure(format!(
            "outer jet has {} variables but {} inner jets were given",
            outer.num_vars(),
            inner.len()
        )));
    }
    let first = inner
        .first()
        .ok_or_else(|| Error::Structure("composition needs at least one inner jet".into()))?;
    for (i, j) in inner.iter().enumerate() {
        first.check_shape(j)?;
        if j.constant_term().norm() > ZERO_TERM_TOL {
            return Err(Error::Domain(format!(
                "inner jet {} has nonzero constant term {}",
                i,
                j.constant_term()
            )));
        }
    }
    let inner: Vec<Jet> = inner.iter().map(|j| j.nonconstant_part()).collect();
    let layout = outer.layout.clone();
    // value[m] = prod_v inner_v^{m_v}, built one factor at a time along the
    // graded order so each monomial costs a single multiplication.
    let mut values: Vec<Option<Jet>> = vec![None; layout.len()];
    values[0] = Some(first.constant_like(Complex64::new(1.0, 0.0)));
    let mut result = first.constant_like(outer.coeffs[0]);
    let target_order = first.order();
    let mut buf = vec![0u8; layout.num_vars()];
    for i in 1..layout.len() {
        if layout.degree(i) > target_order {
            break;
        }
        let m = layout.monomial(i);
        let v = m.iter().position(|&e| e > 0).expect("nonconstant monomial");
        buf.copy_from_slice(m);
        buf[v] -= 1;
        let lower = layout.index_of(&buf).expect("lower monomial present");
        let prev = values[lower].as_ref().expect("lower monomial computed first");
        let value = prev * &inner[v];
        let c = outer.coeffs[i];
        if c.norm() != 0.0 {
            result = &result + &value.scale(c);
        }
        values[i] = Some(value);
    }
    Ok(result)
}

/// Compositional inverse of a square system with zero constant terms and an
/// invertible linear part: returns `g` with `f(g(y)) = y` through the order.
pub fn invert(system: &[Jet]) -> Result<Vec<Jet>> {
    let n = system.len();
    let first = system
        .first()
        .ok_or_else(|| Error::Structure("cannot invert an empty system".into()))?;
    if first.num_vars() != n {
        return Err(Error::Structure(format!(
            "system of {} jets in {} variables is not square",
            n,
            first.num_vars()
        )));
    }
    for (i, f) in system.iter().enumerate() {
        first.check_shape(f)?;
        if f.constant_term().norm() > ZERO_TERM_TOL {
            return Err(Error::Domain(format!(
                "component {} has nonzero constant term {}",
                i,
                f.constant_term()
            )));
        }
    }
    let order = first.order();
    if order == 0 {
        return Ok(system.iter().map(|f| f.constant_like(Complex64::default())).collect());
    }
    let a = DMatrix::from_fn(n, n, |i, j| system[i].linear_coeff(j));
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin == 0.0 { f64::INFINITY } else { smax / smin };
    if !condition.is_finite() || condition > 1e12 {
        return Err(Error::Singular {
            what: "linear part of jet system".into(),
            condition,
        });
    }
    let a_inv = a.try_inverse().ok_or(Error::Singular {
        what: "linear part of jet system".into(),
        condition,
    })?;
    // Nonlinear remainder N = f - A x.
    let nonlinear: Vec<Jet> = system
        .iter()
        .map(|f| {
            let mut r = f.nonconstant_part();
            for v in 0..n {
                r.coeffs[1 + v] = Complex64::default();
            }
            r
        })
        .collect();
    let ids: Vec<Jet> = (0..n)
        .map(|v| Jet::variable(n, order, v, Complex64::default()))
        .collect();
    let apply_inverse = |rhs: &[Jet]| -> Vec<Jet> {
        (0..n)
            .map(|i| {
                let mut acc = first.constant_like(Complex64::default());
                for (j, r) in rhs.iter().enumerate() {
                    let c = a_inv[(i, j)];
                    if c.norm() != 0.0 {
                        acc = &acc + &r.scale(c);
                    }
                }
                acc
            })
            .collect()
    };
    // g <- A^{-1} (y - N(g)); each sweep fixes one more degree.
    let mut g = apply_inverse(&ids);
    for _ in 1..order {
        let ng: Vec<Jet> = nonlinear.iter().map(|nl| compose(nl, &g)).collect::<Result<_>>()?;
        let rhs: Vec<Jet> = ids.iter().zip(&ng).map(|(y, v)| y - v).collect();
        g = apply_inverse(&rhs);
    }
    Ok(g)
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.$checked(rhs).expect("jet shape mismatch")
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$checked(&rhs).expect("jet shape mismatch")
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$checked(rhs).expect("jet shape mismatch")
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}
