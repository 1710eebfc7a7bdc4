//! Real polynomials and rational functions in one complex variable.
//!
//! Coefficients are stored in ascending order: `coeffs[k]` multiplies `s^k`.
//! Rational functions are kept coprime up to a root-matching tolerance, which
//! is what the pole counting in [`crate::lti`] relies on.

mod rational;
mod roots;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::LinalgError;

pub use rational::{rat_eval, rat_reduce, EvalPoint, RationalFunction};
pub(crate) use roots::{cluster_points, pair_conjugates};
pub use roots::{poly_roots, Root, RootMultiset};

/// Default tolerance for root clustering and approximate common factors.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Real-part threshold separating open right-half-plane roots from the
/// imaginary-axis band.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RatError {
    #[error("undefined roots: the zero polynomial has no finite root set")]
    UndefinedRoots,
    #[error("denominator is the zero polynomial")]
    ZeroDenominator,
    #[error("evaluation at pole s = {0}")]
    EvaluationAtPole(Complex64),
    #[error("improper rational function has no finite value at infinity")]
    Improper,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, trimming trailing
    /// zeros. An empty or all-zero input gives the zero polynomial.
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// `s - r` for real `r`.
    pub fn linear_root(r: f64) -> Self {
        Self::new(vec![-r, 1.0])
    }

    /// Monic polynomial with the given roots. Roots of a real polynomial must
    /// come in conjugate pairs; the imaginary residue of the expansion is
    /// dropped.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let c = complex_from_roots(roots);
        Self::new(c.iter().map(|z| z.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Degree, or `None` for the zero polynomial (degree minus infinity).
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.coeffs.len() - 1]
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    /// `sum |a_k| |s|^k`, the natural scale of rounding errors in [`Self::eval`].
    pub fn eval_abs(&self, s_abs: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * s_abs + c.abs())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Coefficients of `p(c + t)` in powers of `t` (Taylor coefficients at `c`).
    pub fn taylor_at(&self, c: Complex64) -> Vec<Complex64> {
        let mut a: Vec<Complex64> = self
            .coeffs
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let n = a.len();
        for k in 0..n {
            for j in (k..n - 1).rev() {
                let t = a[j + 1] * c;
                a[j] += t;
            }
        }
        a
    }

    /// Polynomial long division, `self = q * d + r` with `deg r < deg d`.
    pub fn div_rem(&self, d: &Polynomial) -> (Polynomial, Polynomial) {
        let dd = d.degree().expect("division by the zero polynomial");
        let Some(nd) = self.degree() else {
            return (Self::zero(), Self::zero());
        };
        if nd < dd {
            return (Self::zero(), self.clone());
        }
        let mut r = self.coeffs.clone();
        let mut q = vec![0.0; nd - dd + 1];
        let lead = d.leading();
        for k in (0..=nd - dd).rev() {
            let f = r[k + dd] / lead;
            q[k] = f;
            for (j, &dc) in d.coeffs.iter().enumerate() {
                r[k + j] -= f * dc;
            }
            r[k + dd] = 0.0;
        }
        r.truncate(dd.max(1));
        (Self::new(q), Self::new(r))
    }

    /// Removes the factor `prod (s - r_i)` whose roots are (approximately)
    /// roots of `self`, discarding the division remainder. Each linear factor
    /// is deflated from the end that keeps the recurrence contractive.
    pub(crate) fn deflate(&self, roots: &[Complex64]) -> Polynomial {
        let mut a: Vec<Complex64> = self
            .coeffs
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        for &r in roots {
            if a.len() <= 1 {
                break;
            }
            a = deflate_linear(&a, r);
        }
        Self::new(a.iter().map(|z| z.re).collect())
    }

    /// Drops leading coefficients at or below `rel * reference`, the residue
    /// of a cancelled leading term.
    pub(crate) fn chop_leading(&self, rel: f64, reference: f64) -> Polynomial {
        let mut c = self.coeffs.clone();
        while c.len() > 1 && c[c.len() - 1].abs() <= rel * reference {
            c.pop();
        }
        if c.len() == 1 && c[0].abs() <= rel * reference {
            c[0] = 0.0;
        }
        Self::new(c)
    }

    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(1.0 / self.leading())
    }
}

fn deflate_linear(a: &[Complex64], r: Complex64) -> Vec<Complex64> {
    let n = a.len() - 1;
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    if r.norm() <= 1.0 {
        // forward: from the leading coefficient down
        q[n - 1] = a[n];
        for k in (0..n - 1).rev() {
            q[k] = a[k + 1] + r * q[k + 1];
        }
    } else {
        // backward: from the constant term up
        q[0] = -a[0] / r;
        for k in 1..n {
            q[k] = (q[k - 1] - a[k]) / r;
        }
    }
    q
}

pub(crate) fn complex_from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= ck * r;
        }
        c = next;
    }
    c
}

pub fn poly_arith(a: &Polynomial, b: &Polynomial, kind: ArithKind) -> Polynomial {
    match kind {
        ArithKind::Add | ArithKind::Sub => {
            let sign = if kind == ArithKind::Add { 1.0 } else { -1.0 };
            let n = a.coeffs.len().max(b.coeffs.len());
            let c = (0..n)
                .map(|k| {
                    a.coeffs.get(k).copied().unwrap_or(0.0)
                        + sign * b.coeffs.get(k).copied().unwrap_or(0.0)
                })
                .collect();
            Polynomial::new(c)
        }
        ArithKind::Mul => {
            if a.is_zero() || b.is_zero() {
                return Polynomial::zero();
            }
            let mut c = vec![0.0; a.coeffs.len() + b.coeffs.len() - 1];
            for (i, &x) in a.coeffs.iter().enumerate() {
                for (j, &y) in b.coeffs.iter().enumerate() {
                    c[i + j] += x * y;
                }
            }
            Polynomial::new(c)
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        poly_arith(self, rhs, ArithKind::Add)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        poly_arith(self, rhs, ArithKind::Sub)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        poly_arith(self, rhs, ArithKind::Mul)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({:?})", self.coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            let mag = c.abs();
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let show_mag = k == 0 || mag != 1.0;
            if show_mag {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 => write!(f, "s")?,
                _ => write!(f, "s^{k}")?,
            }
        }
        Ok(())
    }
}
