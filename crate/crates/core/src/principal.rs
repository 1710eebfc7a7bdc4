//! Principal gains, principal phases and the principal region.
//!
//! With `A = V S W*`, the polar factors are `U = V W*` (unitary) and
//! `Q = W S W*` (positive semidefinite). Principal gains are the singular
//! values and principal phases the arguments of the eigenvalues of `U`. The
//! principal region is the curvilinear rectangle spanned by the extreme gains
//! and phases when the phase spread is below pi, and the annulus between the
//! extreme gains otherwise.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{self, CMat, LinalgError};
use crate::sgraph::EXCLUSION_TOL;

/// Phases within this of `-pi` are reported as `pi`.
const BRANCH_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalData {
    /// Descending singular values.
    pub gains: Vec<f64>,
    /// Descending phases in `(-pi, pi]`; empty for the zero matrix.
    pub phases: Vec<f64>,
    pub phi_max: Option<f64>,
    pub phi_min: Option<f64>,
    pub spread: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegionKind {
    Rectangle,
    Annulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalRegion {
    pub kind: RegionKind,
    pub r_min: f64,
    pub r_max: f64,
    /// Angular interval, rectangles only.
    pub phi_min: Option<f64>,
    pub phi_max: Option<f64>,
}

/// `A = U Q` with `U` unitary and `Q` Hermitian positive semidefinite.
pub fn polar_decompose(a: &CMat) -> (CMat, CMat) {
    let (v, s, w) = linalg::complex_svd(a);
    let u = &v * w.adjoint();
    let sigma = CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        s.len(),
        s.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let q = &w * sigma * w.adjoint();
    let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
    (u, q)
}

fn principal_phase(z: Complex64) -> f64 {
    let t = z.arg();
    if t <= -PI + BRANCH_SNAP {
        PI
    } else {
        t
    }
}

pub fn principal_values(a: &CMat) -> Result<PrincipalData, LinalgError> {
    let gains = linalg::singular_values(a);
    if gains.first().is_none_or(|&g| g <= EXCLUSION_TOL) {
        return Ok(PrincipalData {
            gains,
            phases: Vec::new(),
            phi_max: None,
            phi_min: None,
            spread: None,
        });
    }
    let (u, _) = polar_decompose(a);
    let mut phases: Vec<f64> = linalg::complex_eigenvalues(&u)?
        .into_iter()
        .map(principal_phase)
        .collect();
    phases.sort_by(|x, y| y.total_cmp(x));
    let (hi, lo) = (phases[0], phases[phases.len() - 1]);
    Ok(PrincipalData {
        gains,
        phases,
        phi_max: Some(hi),
        phi_min: Some(lo),
        spread: Some(hi - lo),
    })
}

/// Rectangle when the phase spread is below pi, annulus otherwise.
pub fn principal_region(a: &CMat) -> Result<PrincipalRegion, LinalgError> {
    let d = principal_values(a)?;
    let r_max = d.gains.first().copied().unwrap_or(0.0);
    let r_min = d.gains.last().copied().unwrap_or(0.0);
    Ok(match d.spread {
        Some(spread) if spread < PI => PrincipalRegion {
            kind: RegionKind::Rectangle,
            r_min,
            r_max,
            phi_min: d.phi_min,
            phi_max: d.phi_max,
        },
        _ => PrincipalRegion {
            kind: RegionKind::Annulus,
            r_min,
            r_max,
            phi_min: None,
            phi_max: None,
        },
    })
}

/// Whether `z` lies in the region, with slack `tol` on radii and angles.
pub fn region_contains(r: &PrincipalRegion, z: Complex64, tol: f64) -> bool {
    let m = z.norm();
    if m < r.r_min - tol || m > r.r_max + tol {
        return false;
    }
    match (r.kind, r.phi_min, r.phi_max) {
        (RegionKind::Rectangle, Some(lo), Some(hi)) => {
            if m <= tol {
                return true;
            }
            let t = principal_phase(z);
            [t, t - 2.0 * PI, t + 2.0 * PI]
                .iter()
                .any(|&a| a >= lo - tol && a <= hi + tol)
        }
        _ => true,
    }
}
