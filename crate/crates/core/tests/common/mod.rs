#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sgdom_core::linalg::{CMat, CVec};
use sgdom_core::lti::{FeedbackLoop, StateSpace, TransferMatrix};
use sgdom_core::ratpoly::{RationalFunction, DEFAULT_TOL};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn complex_matrix(rng: &mut ChaCha8Rng, m: usize) -> CMat {
    CMat::from_fn(m, m, |_, _| Complex64::new(normal(rng), normal(rng)))
}

pub fn unit_vector(rng: &mut ChaCha8Rng, m: usize) -> CVec {
    let v = CVec::from_fn(m, |_, _| Complex64::new(normal(rng), normal(rng)));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Unitary factor of the QR decomposition of a random complex matrix.
pub fn unitary(rng: &mut ChaCha8Rng, m: usize) -> CMat {
    complex_matrix(rng, m).qr().q()
}

pub fn rf(num: &[f64], den: &[f64]) -> RationalFunction {
    RationalFunction::from_coeffs(num, den, DEFAULT_TOL).unwrap()
}

pub fn siso(num: &[f64], den: &[f64]) -> TransferMatrix {
    TransferMatrix::scalar(rf(num, den)).unwrap()
}

/// Random real pole set: `unstable` of them in the open right half-plane,
/// all with `|Re| >= 0.3`, as a block-diagonal real state matrix.
pub fn pole_blocks(
    rng: &mut ChaCha8Rng,
    n: usize,
    unstable: usize,
) -> (DMatrix<f64>, Vec<Complex64>) {
    let mut a = DMatrix::zeros(n, n);
    let mut poles = Vec::new();
    let mut k = 0;
    while k < n {
        let rhp = poles.len() < unstable;
        let re = rng.gen_range(0.3..2.5) * if rhp { 1.0 } else { -1.0 };
        let pair_ok = k + 1 < n && (!rhp || poles.len() + 2 <= unstable);
        if pair_ok && rng.gen_bool(0.4) {
            let im = rng.gen_range(0.3..3.0);
            a[(k, k)] = re;
            a[(k + 1, k + 1)] = re;
            a[(k, k + 1)] = im;
            a[(k + 1, k)] = -im;
            poles.push(Complex64::new(re, im));
            poles.push(Complex64::new(re, -im));
            k += 2;
        } else {
            a[(k, k)] = re;
            poles.push(Complex64::new(re, 0.0));
            k += 1;
        }
    }
    (a, poles)
}

/// Random `m x m` state-space system of order `n` with `unstable` poles in
/// the open right half-plane, optionally with feedthrough.
pub fn random_state_space(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    unstable: usize,
    feedthrough: bool,
) -> StateSpace {
    let (a0, _) = pole_blocks(rng, n, unstable);
    let t = DMatrix::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 } else { 0.0 } + 0.3 * normal(rng),
    );
    let t = if t.clone().try_inverse().is_some() {
        t
    } else {
        DMatrix::identity(n, n)
    };
    let a = &t * a0 * t.clone().try_inverse().unwrap();
    let b = DMatrix::from_fn(n, m, |_, _| normal(rng));
    let c = DMatrix::from_fn(m, n, |_, _| normal(rng));
    let d = if feedthrough {
        DMatrix::from_fn(m, m, |_, _| 0.3 * normal(rng))
    } else {
        DMatrix::zeros(m, m)
    };
    StateSpace::new(a, b, c, d).unwrap()
}

/// Closed-loop state matrix of the positive feedback interconnection
/// `u = C y`, `y = P u`.
pub fn closed_loop_matrix(p: &StateSpace, c: &StateSpace) -> Option<DMatrix<f64>> {
    let (np, nc, m) = (p.n(), c.n(), p.m());
    let n = np + nc;
    let mut e = DMatrix::<f64>::identity(2 * m, 2 * m);
    e.view_mut((0, m), (m, m)).copy_from(&(-c.d()));
    e.view_mut((m, 0), (m, m)).copy_from(&(-p.d()));
    let e_inv = e.try_inverse()?;
    // outputs [u; y] = E^{-1} [C_C x_c; C_P x_p]
    let mut out_map = DMatrix::zeros(2 * m, n);
    out_map.view_mut((0, np), (m, nc)).copy_from(c.c());
    out_map.view_mut((m, 0), (m, np)).copy_from(p.c());
    let uy = e_inv * out_map;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (np, np)).copy_from(p.a());
    a.view_mut((np, np), (nc, nc)).copy_from(c.a());
    // x_p' gets B_P u, x_c' gets B_C y
    let bu = p.b() * uy.rows(0, m);
    let by = c.b() * uy.rows(m, m);
    let mut top = a.view_mut((0, 0), (np, n));
    top += &bu;
    let mut bottom = a.view_mut((np, 0), (nc, n));
    bottom += &by;
    Some(a)
}

/// Open right-half-plane eigenvalue count of the closed-loop state matrix,
/// or `None` when an eigenvalue is within `margin` of the imaginary axis.
pub fn closed_loop_rhp(p: &StateSpace, c: &StateSpace, margin: f64) -> Option<usize> {
    let a = closed_loop_matrix(p, c)?;
    let eig = a.complex_eigenvalues();
    if eig.iter().any(|z| z.re.abs() < margin) {
        return None;
    }
    Some(eig.iter().filter(|z| z.re > 0.0).count())
}

pub struct RandomLoop {
    pub lp: FeedbackLoop,
    pub p_ss: StateSpace,
    pub c_ss: StateSpace,
}

/// Random loop of dimension `m` built from realizations, with at most two
/// unstable poles in each system.
pub fn random_loop(rng: &mut ChaCha8Rng, m: usize) -> Option<RandomLoop> {
    let np = rng.gen_range(1..=m + 1);
    let nc = rng.gen_range(1..=m + 1);
    let up = rng.gen_range(0..=np.min(2));
    let uc = rng.gen_range(0..=nc.min(1));
    let p_ss = random_state_space(rng, m, np, up, false);
    let ft = rng.gen_bool(0.5);
    let c_ss = random_state_space(rng, m, nc, uc, ft);
    let scale: f64 = rng.gen_range(0.2..1.5);
    let c_ss = StateSpace::new(
        c_ss.a().clone(),
        c_ss.b().clone(),
        c_ss.c() * scale,
        c_ss.d() * scale,
    )
    .ok()?;
    let p = TransferMatrix::from_state_space(p_ss.clone(), DEFAULT_TOL).ok()?;
    let c = TransferMatrix::from_state_space(c_ss.clone(), DEFAULT_TOL).ok()?;
    let lp = FeedbackLoop::new(p, c).ok()?;
    Some(RandomLoop { lp, p_ss, c_ss })
}

/// Companion-matrix root count in the open right half-plane, computed
/// directly with nalgebra. `None` if a root is within `margin` of the axis.
pub fn rhp_roots(ascending: &[f64], margin: f64) -> Option<usize> {
    let mut c: Vec<f64> = ascending.to_vec();
    while c.len() > 1 && *c.last().unwrap() == 0.0 {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Some(0);
    }
    let lead = c[n];
    let comp = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -c[n - 1 - j] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = comp.complex_eigenvalues();
    if eig.iter().any(|z| z.re.abs() < margin) {
        return None;
    }
    Some(eig.iter().filter(|z| z.re > 0.0).count())
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0))
        .collect()
}
