//! Expression trees for real-analytic coefficient functions.
//!
//! An [`Expr`] is evaluated over any [`Scalar`]: plain complex numbers, or
//! [`Jet`]s for exact-to-order Taylor propagation. Constants are real, so every
//! expression commutes with complex conjugation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jet::Jet;
use crate::error::{Error, Result};

/// Numbers that expressions and integrators can run on.
pub trait Scalar: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    /// A constant of the same shape as `self`.
    fn constant_like(&self, c: Complex64) -> Self;
    /// Value at the expansion point.
    fn value(&self) -> Complex64;
    fn scale(&self, c: Complex64) -> Self;
    fn recip(&self) -> Result<Self>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;

    fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut acc = self.constant_like(Complex64::new(1.0, 0.0));
        for _ in 0..k {
            acc = acc * self.clone();
        }
        Ok(acc)
    }
}

impl Scalar for Complex64 {
    fn constant_like(&self, c: Complex64) -> Self {
        c
    }
    fn value(&self) -> Complex64 {
        *self
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
    fn recip(&self) -> Result<Self> {
        if self.norm() == 0.0 {
            Err(Error::Domain("division by zero".into()))
        } else {
            Ok(self.inv())
        }
    }
    fn sin(&self) -> Self {
        Complex64::sin(*self)
    }
    fn cos(&self) -> Self {
        Complex64::cos(*self)
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn powi(&self, k: i32) -> Result<Self> {
        if k < 0 && self.norm() == 0.0 {
            return Err(Error::Domain("negative power of zero".into()));
        }
        Ok(Complex64::powi(self, k))
    }
}

impl Scalar for Jet {
    fn constant_like(&self, c: Complex64) -> Self {
        Jet::constant_like(self, c)
    }
    fn value(&self) -> Complex64 {
        self.constant_term()
    }
    fn scale(&self, c: Complex64) -> Self {
        Jet::scale(self, c)
    }
    fn recip(&self) -> Result<Self> {
        Jet::recip(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn powi(&self, k: i32) -> Result<Self> {
        Jet::powi(self, k)
    }
}

/// Expression tree. Serialized externally tagged in snake case, e.g.
/// `{"mul": [{"const": 2.0}, {"sin": {"var": 0}}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    Const(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn c(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn powi(self, k: i32) -> Expr {
        Expr::Pow(Box::new(self), k)
    }

    pub fn sin(self) -> Expr {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Expr {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }

    /// `(e^x - e^{-x}) / 2`
    pub fn sinh(self) -> Expr {
        (self.clone().exp() - (-self).exp()) * Expr::c(0.5)
    }

    /// `(e^x + e^{-x}) / 2`
    pub fn cosh(self) -> Expr {
        (self.clone().exp() + (-self).exp()) * Expr::c(0.5)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(v) if *v == 0.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// One more than the largest variable index used (0 for constants).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Sin(a) | Expr::Cos(a) | Expr::Exp(a) => a.arity(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.arity().max(b.arity()),
        }
    }

    /// Evaluates on scalars or jets. `args` supplies the variables; its first
    /// element also fixes the shape of constants.
    pub fn eval<T: Scalar>(&self, args: &[T]) -> Result<T> {
        let template = args
            .first()
            .ok_or_else(|| Error::Structure("expression needs at least one argument".into()))?;
        if self.arity() > args.len() {
            return Err(Error::Structure(format!(
                "expression uses {} variables but {} arguments were given",
                self.arity(),
                args.len()
            )));
        }
        self.eval_inner(args, template)
    }

    fn eval_inner<T: Scalar>(&self, args: &[T], template: &T) -> Result<T> {
        Ok(match self {
            Expr::Const(v) => template.constant_like(Complex64::new(*v, 0.0)),
            Expr::Var(i) => args[*i].clone(),
            Expr::Neg(a) => -a.eval_inner(args, template)?,
            Expr::Add(a, b) => a.eval_inner(args, template)? + b.eval_inner(args, template)?,
            Expr::Sub(a, b) => a.eval_inner(args, template)? - b.eval_inner(args, template)?,
            Expr::Mul(a, b) => {
                if let Some(k) = a.as_const() {
                    b.eval_inner(args, template)?.scale(Complex64::new(k, 0.0))
                } else if let Some(k) = b.as_const() {
                    a.eval_inner(args, template)?.scale(Complex64::new(k, 0.0))
                } else {
                    a.eval_inner(args, template)? * b.eval_inner(args, template)?
                }
            }
            Expr::Div(a, b) => {
                let den = b.eval_inner(args, template)?;
                a.eval_inner(args, template)? * den.recip()?
            }
            Expr::Pow(a, k) => a.eval_inner(args, template)?.powi(*k)?,
            Expr::Sin(a) => a.eval_inner(args, template)?.sin(),
            Expr::Cos(a) => a.eval_inner(args, template)?.cos(),
            Expr::Exp(a) => a.eval_inner(args, template)?.exp(),
        })
    }

    /// Real evaluation at a real point.
    pub fn eval_real(&self, args: &[f64]) -> Result<f64> {
        let z: Vec<Complex64> = args.iter().map(|&a| Complex64::new(a, 0.0)).collect();
        Ok(self.eval(&z)?.re)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{}", v),
            Expr::Var(i) => write!(f, "x{}", i),
            Expr::Neg(a) => write!(f, "-({})", a),
            Expr::Add(a, b) => write!(f, "({} + {})", a, b),
            Expr::Sub(a, b) => write!(f, "({} - {})", a, b),
            Expr::Mul(a, b) => write!(f, "{} * {}", a, b),
            Expr::Div(a, b) => write!(f, "{} / {}", a, b),
            Expr::Pow(a, k) => write!(f, "({})^{}", a, k),
            Expr::Sin(a) => write!(f, "sin({})", a),
            Expr::Cos(a) => write!(f, "cos({})", a),
            Expr::Exp(a) => write!(f, "exp({})", a),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(Box::new(self), Box::new(rhs))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}
