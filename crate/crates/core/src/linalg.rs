//! Dense linear-algebra helpers on top of `nalgebra`.
//!
//! Everything here works on dynamically sized matrices. Complex matrices use
//! `Complex64` entries; the helpers add the pieces nalgebra does not ship
//! directly (balancing, complex eigenvectors, sorted SVD factors).

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;
use thiserror::Error;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("eigenvalue iteration did not converge for a {0}x{0} matrix")]
    NoConvergence(usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

pub fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

pub fn to_complex(a: &DMatrix<f64>) -> CMat {
    a.map(|x| Complex64::new(x, 0.0))
}

/// Diagonal similarity scaling by powers of two (LAPACK `gebal` without
/// permutations). Eigenvalues are unchanged; rounding errors become
/// proportional to the balanced norm instead of the raw one.
pub fn balance(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mut b = a.clone();
    if n < 2 {
        return b;
    }
    const RADIX: f64 = 2.0;
    let mut converged = false;
    let mut sweeps = 0;
    while !converged && sweeps < 100 {
        converged = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].abs();
                    r += b[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let g = r / RADIX;
            while cc < g {
                f *= RADIX;
                cc *= RADIX * RADIX;
            }
            let g = r * RADIX;
            while cc > g {
                f /= RADIX;
                cc /= RADIX * RADIX;
            }
            if (cc + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    b[(i, j)] /= f;
                    b[(j, i)] *= f;
                }
            }
        }
    }
    b
}

/// Eigenvalues of a real square matrix (balanced, real Schur form).
pub fn real_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>, LinalgError> {
    let n = a.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    if n == 1 {
        return Ok(vec![Complex64::new(a[(0, 0)], 0.0)]);
    }
    let b = balance(a);
    let schur =
        Schur::try_new(b, SCHUR_EPS, SCHUR_MAX_ITER).ok_or(LinalgError::NoConvergence(n))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Complex Schur decomposition `A = Q T Q*` with `T` upper triangular.
pub fn complex_schur(a: &CMat) -> Result<(CMat, CMat), LinalgError> {
    let n = a.nrows();
    if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    if n <= 1 {
        return Ok((CMat::identity(n, n), a.clone()));
    }
    let schur = Schur::try_new(a.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or(LinalgError::NoConvergence(n))?;
    Ok(schur.unpack())
}

pub fn complex_eigenvalues(a: &CMat) -> Result<Vec<Complex64>, LinalgError> {
    let (_, t) = complex_schur(a)?;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Eigenpairs of a complex matrix. Eigenvectors have unit 2-norm and come
/// from back substitution on the Schur factor, so repeated eigenvalues still
/// get a (possibly shared) eigenvector rather than a failure.
pub fn complex_eig(a: &CMat) -> Result<Vec<(Complex64, CVec)>, LinalgError> {
    let n = a.nrows();
    let (q, t) = complex_schur(a)?;
    let tnorm = t.norm().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = CVec::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = czero();
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[j] = -acc / d;
        }
        let mut x = &q * y;
        let nx = x.norm();
        if nx > 0.0 {
            x /= Complex64::new(nx, 0.0);
        }
        out.push((lambda, x));
    }
    Ok(out)
}

/// Full SVD `A = U diag(s) V*` of a square complex matrix, singular values
/// in descending order. Returns `(U, s, V)`.
pub fn complex_svd(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (CMat::zeros(0, 0), Vec::new(), CMat::zeros(0, 0));
    }
    let svd = SVD::new(a.clone(), true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let u_sorted = CMat::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_sorted = CMat::from_fn(v_t.ncols(), order.len(), |r, c| v_t[(order[c], r)].conj());
    (u_sorted, s, v_sorted)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn spectral_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    // Symmetrize explicitly; callers pass (A + A*)/2 style matrices built in
    // floating point.
    let hs = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hs);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Numerical rank: number of singular values above `tol * sigma_max`.
/// Also reports whether any singular value sits within a factor of 10 of the
/// threshold.
pub fn numerical_rank(s: &[f64], tol: f64) -> (usize, bool) {
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return (0, false);
    }
    let thr = tol * smax;
    let rank = s.iter().filter(|&&x| x > thr).count();
    let ambiguous = s.iter().any(|&x| x > thr / 10.0 && x < thr * 10.0);
    (rank, ambiguous)
}

/// Orthonormal basis (columns) of the range of a real matrix, keeping
/// directions whose singular value exceeds `threshold`.
pub(crate) fn real_range_basis(w: &DMatrix<f64>, threshold: f64) -> (DMatrix<f64>, Vec<f64>) {
    let (n, k) = w.shape();
    if n == 0 || k == 0 {
        return (DMatrix::zeros(n, 0), Vec::new());
    }
    let svd = SVD::new(w.clone(), true, false);
    let u = svd.u.expect("u requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let s: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let keep: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| svd.singular_values[i] > threshold)
        .collect();
    let basis = DMatrix::from_fn(n, keep.len(), |r, c| u[(r, keep[c])]);
    (basis, s)
}

/// `|det|` of a complex square matrix via LU.
pub fn det_abs(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 1.0;
    }
    a.clone().lu().determinant().norm()
}

pub fn is_unitary(u: &CMat, tol: f64) -> bool {
    let n = u.nrows();
    if u.ncols() != n {
        return false;
    }
    let e = u.adjoint() * u - CMat::identity(n, n);
    e.iter().all(|x| x.norm() <= tol)
}
