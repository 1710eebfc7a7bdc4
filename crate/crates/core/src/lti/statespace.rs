use nalgebra::DMatrix;
use num_complex::Complex64;

use super::LtiError;
use crate::linalg::{self, CMat};
use crate::ratpoly::{cluster_points, pair_conjugates, Polynomial, RationalFunction};

/// Real realization `(A, B, C, D)` with `m` inputs and `m` outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    minimal: bool,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        d: DMatrix<f64>,
    ) -> Result<Self, LtiError> {
        let n = a.nrows();
        let m = d.nrows();
        let dims_ok = a.ncols() == n
            && b.nrows() == n
            && b.ncols() == m
            && c.nrows() == m
            && c.ncols() == n
            && d.ncols() == m;
        if !dims_ok {
            return Err(LtiError::Dimension(format!(
                "A {}x{}, B {}x{}, C {}x{}, D {}x{}",
                a.nrows(),
                a.ncols(),
                b.nrows(),
                b.ncols(),
                c.nrows(),
                c.ncols(),
                d.nrows(),
                d.ncols()
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            minimal: false,
        })
    }

    /// Runs the PBH test and records the outcome in the minimality flag.
    pub fn certify_minimal(mut self, tol: f64) -> Self {
        self.minimal = ss_minimality(&self, tol);
        self
    }

    pub fn is_certified_minimal(&self) -> bool {
        self.minimal
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.d.nrows()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }

    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// `C (sI - A)^{-1} B + D`, or `None` when `sI - A` is singular.
    pub fn eval(&self, s: Complex64) -> Option<CMat> {
        let n = self.n();
        let d = linalg::to_complex(&self.d);
        if n == 0 {
            return Some(d);
        }
        let si_a = CMat::identity(n, n) * s - linalg::to_complex(&self.a);
        let x = si_a.lu().solve(&linalg::to_complex(&self.b))?;
        if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return None;
        }
        Some(linalg::to_complex(&self.c) * x + d)
    }

    pub(crate) fn scale_output(&self, k: f64) -> StateSpace {
        StateSpace {
            a: self.a.clone(),
            b: self.b.clone(),
            c: &self.c * k,
            d: &self.d * k,
            minimal: self.minimal && k != 0.0,
        }
    }

    /// Rational entries through the matrix determinant lemma:
    /// `c_i (sI - A)^{-1} b_j = [det(sI - A + b_j c_i) - det(sI - A)] / det(sI - A)`.
    pub fn transfer_entries(&self, tol: f64) -> Result<Vec<RationalFunction>, LtiError> {
        let (n, m) = (self.n(), self.m());
        let mut out = Vec::with_capacity(m * m);
        if n == 0 {
            for i in 0..m {
                for j in 0..m {
                    out.push(RationalFunction::constant(self.d[(i, j)]));
                }
            }
            return Ok(out);
        }
        let chi = charpoly(&self.a)?;
        for i in 0..m {
            for j in 0..m {
                let rank_one = self.b.column(j) * self.c.row(i);
                let chi_ij = charpoly(&(&self.a - rank_one))?;
                let reference = chi.max_abs_coeff().max(chi_ij.max_abs_coeff());
                let diff = (&chi_ij - &chi).chop_leading(64.0 * n as f64 * f64::EPSILON, reference);
                let num = &diff + &chi.scale(self.d[(i, j)]);
                out.push(RationalFunction::new(num, chi.clone(), tol)?);
            }
        }
        Ok(out)
    }
}

/// Monic characteristic polynomial from the (conjugate-paired) spectrum.
fn charpoly(a: &DMatrix<f64>) -> Result<Polynomial, LtiError> {
    let eig = linalg::real_eigenvalues(a)?;
    Ok(Polynomial::from_roots(&eig))
}

/// PBH test: `[lambda I - A, B]` and `[lambda I - A^T, C^T]` have full row
/// rank at every eigenvalue of `A`, with ranks judged by singular values
/// above `tol * sigma_max`.
pub fn ss_minimality(s: &StateSpace, tol: f64) -> bool {
    let n = s.n();
    if n == 0 {
        return true;
    }
    let Ok(eig) = linalg::real_eigenvalues(&s.a) else {
        return false;
    };
    let norm = s.a.norm().max(f64::MIN_POSITIVE);
    let mut distinct = cluster_points(&eig, tol, |_, k| {
        (1e3 * f64::EPSILON).powf(1.0 / k as f64) * norm
    });
    pair_conjugates(&mut distinct);
    let ac = linalg::to_complex(&s.a);
    let full_rank = |lambda: Complex64, a: &CMat, side: &DMatrix<f64>| {
        let k = side.ncols();
        let mut w = CMat::zeros(n, n + k);
        for r in 0..n {
            for c in 0..n {
                w[(r, c)] = -a[(r, c)];
            }
            w[(r, r)] += lambda;
            for c in 0..k {
                w[(r, n + c)] = Complex64::new(side[(r, c)], 0.0);
            }
        }
        let sv: Vec<f64> = w.singular_values().iter().copied().collect();
        linalg::numerical_rank(&sv, tol).0 == n
    };
    let act = ac.transpose();
    let ct = s.c.transpose();
    distinct
        .iter()
        .all(|r| full_rank(r.value, &ac, &s.b) && full_rank(r.value, &act, &ct))
}
