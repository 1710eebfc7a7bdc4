use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{ss_minimality, LtiError, TransferMatrix};
use crate::linalg;
use crate::ratpoly::{cluster_points, pair_conjugates, RootMultiset, BOUNDARY_TOL, DEFAULT_TOL};

/// Poles of a transfer matrix with their half-plane counts.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSet {
    pub roots: RootMultiset,
    pub n_orhp: usize,
    pub n_olhp: usize,
    /// Rank decisions that were close to the threshold.
    pub warnings: Vec<String>,
}

impl PoleSet {
    fn classify(roots: RootMultiset, warnings: Vec<String>) -> Result<Self, LtiError> {
        let mut n_orhp = 0;
        let mut n_olhp = 0;
        for r in roots.roots() {
            if r.value.re > BOUNDARY_TOL {
                n_orhp += r.multiplicity;
            } else if r.value.re < -BOUNDARY_TOL {
                n_olhp += r.multiplicity;
            } else {
                return Err(LtiError::BoundaryPole(r.value));
            }
        }
        Ok(Self {
            roots,
            n_orhp,
            n_olhp,
            warnings,
        })
    }

    /// McMillan degree: total pole count with multiplicity.
    pub fn degree(&self) -> usize {
        self.n_orhp + self.n_olhp
    }
}

/// Groups eigenvalues of a real matrix of norm `scale` into multiple poles.
pub(crate) fn cluster_eigenvalues(vals: &[Complex64], scale: f64, tol: f64) -> RootMultiset {
    let scale = scale.max(f64::MIN_POSITIVE);
    let mut roots = cluster_points(vals, tol, |_, k| {
        (1e3 * f64::EPSILON).powf(1.0 / k as f64) * scale
    });
    pair_conjugates(&mut roots);
    RootMultiset::new(roots)
}

/// Poles of `g`.
///
/// A realization that passes the PBH test gives the poles directly as the
/// eigenvalues of its state matrix. Otherwise each entry is realized in
/// controllable canonical form, the block-diagonal realization is reduced to
/// its controllable and then observable part with rank tolerance `tol`, and
/// the poles are the eigenvalues of the reduced state matrix.
pub fn tm_poles(g: &TransferMatrix, tol: f64) -> Result<PoleSet, LtiError> {
    if let Some(ss) = g.realization() {
        if ss.is_certified_minimal() || ss_minimality(ss, tol) {
            let eig = linalg::real_eigenvalues(ss.a())?;
            return PoleSet::classify(cluster_eigenvalues(&eig, ss.a().norm(), tol), Vec::new());
        }
    }
    let (a, b, c) = entrywise_realization(g);
    let mut warnings = Vec::new();
    let a_min = kalman_reduce(&a, &b, &c, tol, &mut warnings);
    let eig = linalg::real_eigenvalues(&a_min)?;
    PoleSet::classify(cluster_eigenvalues(&eig, a_min.norm(), tol), warnings)
}

/// Number of open right-half-plane poles.
pub fn dominance_index(g: &TransferMatrix) -> Result<usize, LtiError> {
    Ok(tm_poles(g, DEFAULT_TOL)?.n_orhp)
}

/// Block-diagonal realization with one controllable canonical block per
/// entry. The block of entry `(i, j)` is driven by input `j` and feeds output
/// `i`. Feedthrough is irrelevant for poles and omitted.
fn entrywise_realization(g: &TransferMatrix) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let m = g.m();
    let n: usize = g
        .entries()
        .iter()
        .map(|e| e.den().degree().unwrap_or(0))
        .sum();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, m);
    let mut c = DMatrix::zeros(m, n);
    let mut off = 0;
    for i in 0..m {
        for j in 0..m {
            let e = g.entry(i, j);
            let k = e.den().degree().unwrap_or(0);
            if k == 0 {
                continue;
            }
            // den is monic; strip the feedthrough from the numerator
            let den = e.den().coeffs();
            let num = e.num().coeffs();
            let d = if num.len() == k + 1 { num[k] } else { 0.0 };
            for r in 0..k - 1 {
                a[(off + r, off + r + 1)] = 1.0;
            }
            for col in 0..k {
                a[(off + k - 1, off + col)] = -den[col];
                let nc = num.get(col).copied().unwrap_or(0.0);
                c[(i, off + col)] = nc - d * den[col];
            }
            b[(off + k - 1, j)] = 1.0;
            off += k;
        }
    }
    (a, b, c)
}

/// Minimal state matrix of `(A, B, C)`: controllable part first, then the
/// observable part of that.
fn kalman_reduce(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    tol: f64,
    warnings: &mut Vec<String>,
) -> DMatrix<f64> {
    let qc = reachable_basis(a, b, tol, warnings, "controllability");
    let ac = qc.transpose() * a * &qc;
    let cc = c * &qc;
    let act = ac.transpose();
    let qo = reachable_basis(&act, &cc.transpose(), tol, warnings, "observability");
    qo.transpose() * act * qo
}

/// Orthonormal basis of the Krylov space `span{B, AB, A^2 B, ...}`. Each new
/// block is orthogonalized twice against the current basis and kept where its
/// singular values exceed `tol` times the block's norm before projection.
fn reachable_basis(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    tol: f64,
    warnings: &mut Vec<String>,
    what: &str,
) -> DMatrix<f64> {
    let n = a.nrows();
    let mut note = |s: &[f64], thr: f64| {
        if s.iter().any(|&x| x > thr / 10.0 && x < thr * 10.0) {
            warnings.push(format!(
                "{what} rank decision within a factor of 10 of the threshold {thr:.3e}"
            ));
        }
    };
    let bnorm = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if n == 0 || bnorm == 0.0 {
        return DMatrix::zeros(n, 0);
    }
    let bmax = linalg::singular_values(&linalg::to_complex(b))
        .first()
        .copied()
        .unwrap_or(0.0);
    let (mut q, s) = linalg::real_range_basis(b, tol * bmax);
    note(&s, tol * bmax);
    let mut fresh = q.clone();
    while q.ncols() < n && fresh.ncols() > 0 {
        let w = a * &fresh;
        let wmax = linalg::singular_values(&linalg::to_complex(&w))
            .first()
            .copied()
            .unwrap_or(0.0);
        if wmax == 0.0 {
            break;
        }
        let mut wp = &w - &q * (q.transpose() * &w);
        wp = &wp - &q * (q.transpose() * &wp);
        let (basis, s) = linalg::real_range_basis(&wp, tol * wmax);
        note(&s, tol * wmax);
        let room = n - q.ncols();
        let take = basis.ncols().min(room);
        fresh = basis.columns(0, take).into_owned();
        if take == 0 {
            break;
        }
        let old = q.ncols();
        q = q.resize_horizontally(old + take, 0.0);
        q.columns_mut(old, take).copy_from(&fresh);
    }
    q
}
