//! Boundary witnesses from the joint range of `(x* H x, x* A*A x)`.
//!
//! For unit `x` the upper scaled-graph point is `r + j sqrt(g - r^2)` with
//! `r = x* H x`, `H = (A + A*)/2`, and `g = x* A*A x`. The set of pairs
//! `(r, g)` is the numerical range of `H + j A*A`, hence convex, and its
//! boundary is traced by minimal eigenvectors of `cos t H + sin t A*A`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::optimize::minimize_on_spheres;
use super::{upper_point, EXCLUSION_TOL};
use crate::linalg::{self, CMat, CVec};

/// Exact matrix statistics that bound a scaled graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SGStats {
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// Largest phase over all inputs, in `[0, pi]`.
    pub psi: f64,
    /// Smallest eigenvalue of `(A + A*)/2`.
    pub herm_min_eig: f64,
}

struct JointForms {
    h: CMat,
    g: CMat,
    g_scale: f64,
}

impl JointForms {
    fn new(a: &CMat) -> Self {
        let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
        let g = a.adjoint() * a;
        let g_scale = linalg::spectral_norm(a).max(f64::MIN_POSITIVE);
        Self { h, g, g_scale }
    }

    fn support(&self, t: f64) -> CVec {
        let m = &self.h * Complex64::new(t.cos(), 0.0)
            + &self.g * Complex64::new(t.sin() / self.g_scale, 0.0);
        let (_, vecs) = linalg::hermitian_eig(&m);
        vecs.column(0).into_owned()
    }

    fn pair(&self, x: &CVec) -> (f64, f64) {
        let r = x.dotc(&(&self.h * x)).re;
        let g = x.dotc(&(&self.g * x)).re;
        (r, g)
    }
}

fn phase_of_pair(r: f64, g: f64) -> Option<f64> {
    if g <= EXCLUSION_TOL * EXCLUSION_TOL {
        return None;
    }
    Some((g - r * r).max(0.0).sqrt().atan2(r))
}

fn align(prev: &CVec, x: CVec) -> CVec {
    let ip = prev.dotc(&x);
    if ip.norm() > 0.0 {
        x * (ip.conj() / ip.norm())
    } else {
        x
    }
}

/// `k` support witnesses around the boundary plus one phase-aligned midpoint
/// between each consecutive pair.
pub(crate) fn support_witnesses(a: &CMat, k: usize) -> Vec<CVec> {
    if k == 0 || a.nrows() < 2 {
        return Vec::new();
    }
    let forms = JointForms::new(a);
    let mut base: Vec<CVec> = Vec::with_capacity(k);
    for i in 0..k {
        let t = std::f64::consts::TAU * i as f64 / k as f64;
        let x = forms.support(t);
        let x = match base.last() {
            Some(prev) => align(prev, x),
            None => x,
        };
        base.push(x);
    }
    let mut out = Vec::with_capacity(2 * k);
    for i in 0..k {
        out.push(base[i].clone());
        let next = align(&base[i], base[(i + 1) % k].clone());
        let mid = &base[i] + next;
        let n = mid.norm();
        if n > 1e-8 {
            out.push(mid / Complex64::new(n, 0.0));
        }
    }
    out
}

/// Structural witnesses: right singular vectors, eigenvectors of `A` and of
/// its Hermitian part.
pub(crate) fn structural_witnesses(a: &CMat) -> Vec<CVec> {
    let m = a.nrows();
    let mut out = Vec::new();
    let (_, _, v) = linalg::complex_svd(a);
    for k in 0..v.ncols() {
        out.push(v.column(k).into_owned());
    }
    if let Ok(pairs) = linalg::complex_eig(a) {
        out.extend(pairs.into_iter().map(|(_, x)| x));
    }
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let (_, hv) = linalg::hermitian_eig(&h);
    for k in 0..m {
        out.push(hv.column(k).into_owned());
    }
    out
}

fn phase_at(a: &CMat, x: &CVec) -> Option<f64> {
    upper_point(a, x).map(|z| z.arg())
}

/// Largest phase over unit inputs.
fn singular_angle(a: &CMat, sigma_max: f64) -> f64 {
    if a.nrows() == 1 {
        let z = a[(0, 0)];
        return if z.norm() > EXCLUSION_TOL {
            z.im.abs().atan2(z.re)
        } else {
            0.0
        };
    }
    if sigma_max <= EXCLUSION_TOL {
        return 0.0;
    }
    const DIRS: usize = 256;
    let forms = JointForms::new(a);
    let ts: Vec<f64> = (0..DIRS)
        .map(|i| std::f64::consts::TAU * i as f64 / DIRS as f64)
        .collect();
    let xs: Vec<CVec> = ts.iter().map(|&t| forms.support(t)).collect();
    let pairs: Vec<(f64, f64)> = xs.iter().map(|x| forms.pair(x)).collect();

    let mut best = 0.0f64;
    let mut best_x: Option<CVec> = None;
    let mut best_k = 0;
    for (k, x) in xs.iter().enumerate() {
        if let Some(p) = phase_at(a, x) {
            if p > best {
                best = p;
                best_x = Some(x.clone());
                best_k = k;
            }
        }
    }
    for x in structural_witnesses(a) {
        if let Some(p) = phase_at(a, &x) {
            if p > best {
                best = p;
                best_x = Some(x);
            }
        }
    }
    // interior of hull edges: achievable by convexity
    let mut hull_best = 0.0f64;
    for k in 0..DIRS {
        let (r0, g0) = pairs[k];
        let (r1, g1) = pairs[(k + 1) % DIRS];
        for s in 1..16 {
            let s = s as f64 / 16.0;
            if let Some(p) = phase_of_pair(r0 + s * (r1 - r0), g0 + s * (g1 - g0)) {
                hull_best = hull_best.max(p);
            }
        }
    }
    // golden-section refinement of the support direction
    let step = std::f64::consts::TAU / DIRS as f64;
    let f = |t: f64| {
        let x = forms.support(t);
        phase_at(a, &x).unwrap_or(0.0)
    };
    let (mut lo, mut hi) = (ts[best_k] - step, ts[best_k] + step);
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - gr * (hi - lo);
    let mut d = lo + gr * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - gr * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + gr * (hi - lo);
            fd = f(d);
        }
    }
    let t_star = 0.5 * (lo + hi);
    let x_star = forms.support(t_star);
    if let Some(p) = phase_at(a, &x_star) {
        if p > best {
            best = p;
            best_x = Some(x_star);
        }
    }
    if let Some(x0) = best_x {
        let (_, v) =
            minimize_on_spheres(|b| -phase_at(a, &b[0]).unwrap_or(f64::NAN), vec![x0], 200);
        best = best.max(-v);
    }
    best.max(hull_best).clamp(0.0, std::f64::consts::PI)
}

/// Singular values, singular angle and Hermitian-part minimum eigenvalue.
pub fn sg_stats(a: &CMat) -> SGStats {
    let s = linalg::singular_values(a);
    let sigma_max = s.first().copied().unwrap_or(0.0);
    let sigma_min = s.last().copied().unwrap_or(0.0);
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let (hv, _) = linalg::hermitian_eig(&h);
    SGStats {
        sigma_max,
        sigma_min,
        psi: singular_angle(a, sigma_max),
        herm_min_eig: hv.first().copied().unwrap_or(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_stats() {
        let s = sg_stats(&CMat::identity(3, 3));
        assert!((s.sigma_max - 1.0).abs() < 1e-14 && (s.sigma_min - 1.0).abs() < 1e-14);
        assert!(s.psi.abs() < 1e-7);
        assert!((s.herm_min_eig - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangular_gains() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(-0.9, 0.0)]);
        let s = sg_stats(&a);
        let disc = 4.6561f64.sqrt();
        assert!((s.sigma_max - ((2.81 + disc) / 2.0).sqrt()).abs() < 1e-12);
        assert!((s.sigma_min - ((2.81 - disc) / 2.0).sqrt()).abs() < 1e-12);
        assert!((s.sigma_max - 1.576).abs() < 1e-3);
    }

    #[test]
    fn accretive_matrix_has_acute_angle() {
        let a = CMat::from_row_slice(
            2,
            2,
            &[c(2.0, 1.0), c(0.5, -0.3), c(-0.5, -0.3), c(1.0, 0.0)],
        );
        let s = sg_stats(&a);
        assert!(s.herm_min_eig >= 0.0);
        assert!(s.psi <= std::f64::consts::FRAC_PI_2 + 1e-12);
    }

    #[test]
    fn scalar_phase_and_diagonal_extremes() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]));
        let s = sg_stats(&d);
        // the phase along the pencil between 1 and 2j peaks above pi/2
        assert!(s.psi > std::f64::consts::FRAC_PI_2 - 1e-9);
        let brute = (0..=2000)
            .map(|i| {
                let a = i as f64 / 2000.0 * std::f64::consts::FRAC_PI_2;
                let x = CVec::from_vec(vec![c(a.cos(), 0.0), c(a.sin(), 0.0)]);
                upper_point(&d, &x).unwrap().arg()
            })
            .fold(0.0, f64::max);
        assert!(s.psi >= brute - 1e-9);
    }
}
