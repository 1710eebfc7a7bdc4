//! Scaled graphs of complex matrices.
//!
//! For a unit input `x` with `Ax != 0` the scaled-graph point is
//! `gain * exp(+-j phase)` with `gain = |Ax|` and `cos(phase) = Re(x*Ax)/|Ax|`.
//! Points are stored on the upper branch and computed as `r + j q` with
//! `r = Re(x*Ax)` and `q = |Ax - r x|`, which keeps the phase accurate near 0
//! and pi. The inverse scaled graph swaps input and output, mapping each
//! point `z` to `1 / conj(z)`.
//!
//! Clouds approximate these sets from keyed random samples, structural and
//! boundary witnesses, and locally refined extremes.

mod boundary;
mod distance;
mod optimize;
mod sampling;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, CMat, CVec, LinalgError};

pub use boundary::{sg_stats, SGStats};
pub(crate) use distance::{refine_pair, DISTANCE_REFINE_ITERS};
pub use distance::{sg_distance, DistanceResult, PointIndex};
pub(crate) use optimize::minimize_on_spheres;

/// Inputs with `|Ax|` at or below this are excluded.
pub const EXCLUSION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SgError {
    #[error("excluded input: Ax is numerically zero")]
    ExcludedInput,
    #[error("input vector must be nonzero and match the matrix dimension")]
    BadInput,
    #[error("empty cloud")]
    EmptyCloud,
    #[error("matrix is not unitary to 1e-10")]
    NotUnitary,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One scaled-graph point with the unit input that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SGPoint {
    z: Complex64,
    witness: CVec,
}

impl SGPoint {
    pub(crate) fn new(z: Complex64, witness: CVec) -> Self {
        Self { z, witness }
    }

    /// Upper-branch point `gain * exp(j phase)`.
    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn gain(&self) -> f64 {
        self.z.norm()
    }

    /// Phase in `[0, pi]`.
    pub fn phase(&self) -> f64 {
        self.z.arg().max(0.0)
    }

    pub fn z_plus(&self) -> Complex64 {
        self.z
    }

    pub fn z_minus(&self) -> Complex64 {
        self.z.conj()
    }

    pub fn witness(&self) -> &CVec {
        &self.witness
    }
}

/// Upper scaled-graph point of `A` at the unit vector `x`.
pub(crate) fn upper_point(a: &CMat, x: &CVec) -> Option<Complex64> {
    let ax = a * x;
    let g = ax.norm();
    if !(g > EXCLUSION_TOL) {
        return None;
    }
    let r = x.dotc(&ax).re;
    let q = (&ax - x * Complex64::new(r, 0.0)).norm();
    Some(Complex64::new(r, q))
}

fn unit_input(a: &CMat, x: &CVec) -> Result<CVec, SgError> {
    if x.len() != a.ncols() {
        return Err(SgError::BadInput);
    }
    optimize::normalize(x).ok_or(SgError::BadInput)
}

/// Scaled-graph point of `A` at input `x` (normalized first).
pub fn sg_point(a: &CMat, x: &CVec) -> Result<SGPoint, SgError> {
    let x = unit_input(a, x)?;
    let z = upper_point(a, &x).ok_or(SgError::ExcludedInput)?;
    Ok(SGPoint::new(z, x))
}

/// Inverse scaled-graph point of `A` at input `x`: output `x` for input `Ax`.
pub fn sg_inverse_point(a: &CMat, x: &CVec) -> Result<SGPoint, SgError> {
    let p = sg_point(a, x)?;
    Ok(SGPoint::new(reciprocal(p.z), p.witness))
}

fn reciprocal(z: Complex64) -> Complex64 {
    z / z.norm_sqr()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CloudKind {
    Forward,
    Inverse,
}

/// Sampling budget of one cloud. `stream` selects an independent random
/// stream for the same seed (the sweep uses frequency index and role).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudConfig {
    pub samples: usize,
    pub refine_iters: usize,
    pub seed: u64,
    pub stream: u64,
    /// Support directions used for boundary witnesses.
    pub boundary_dirs: usize,
}

impl Default for CloudConfig {
    fn default() -> Self {
        Self {
            samples: 2000,
            refine_iters: 200,
            seed: 0,
            stream: 0,
            boundary_dirs: 64,
        }
    }
}

/// Point cloud approximating `SG(tau A)` or `SG^dagger(tau A)`.
#[derive(Debug, Clone)]
pub struct SGCloud {
    points: Vec<SGPoint>,
    kind: CloudKind,
    source: String,
    sample_count: usize,
    refined: bool,
    zero_matrix: bool,
    matrix: CMat,
    scale: f64,
}

impl SGCloud {
    /// Cloud without points, used to evaluate witnesses of `A`.
    pub(crate) fn empty(a: &CMat, kind: CloudKind) -> Self {
        Self {
            points: Vec::new(),
            kind,
            source: String::new(),
            sample_count: 0,
            refined: false,
            zero_matrix: false,
            matrix: a.clone(),
            scale: 1.0,
        }
    }

    pub fn points(&self) -> &[SGPoint] {
        &self.points
    }

    pub fn kind(&self) -> CloudKind {
        self.kind
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = source.into();
        self
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn is_refined(&self) -> bool {
        self.refined
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.zero_matrix
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// The unscaled source matrix.
    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Scale `tau` of the represented matrix `tau A`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Cloud of `tau A` with the same witnesses.
    pub fn scaled(&self, tau: f64) -> SGCloud {
        let f = |z: Complex64| match self.kind {
            CloudKind::Forward => z * tau,
            CloudKind::Inverse => z / tau,
        };
        SGCloud {
            points: self
                .points
                .iter()
                .map(|p| SGPoint::new(f(p.z), p.witness.clone()))
                .collect(),
            scale: self.scale * tau,
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> SGCloud {
        SGCloud {
            points: Vec::new(),
            kind: self.kind,
            source: self.source.clone(),
            sample_count: self.sample_count,
            refined: self.refined,
            zero_matrix: self.zero_matrix,
            matrix: self.matrix.clone(),
            scale: self.scale,
        }
    }

    /// Upper point this cloud assigns to the unit input `x`.
    pub fn point_at(&self, x: &CVec) -> Option<Complex64> {
        let x = optimize::normalize(x)?;
        let z = upper_point(&self.matrix, &x)? * self.scale;
        Some(match self.kind {
            CloudKind::Forward => z,
            CloudKind::Inverse => reciprocal(z),
        })
    }

    /// Adds the point of `x` unless the input is excluded.
    pub fn push_witness(&mut self, x: &CVec) -> bool {
        match self.point_at(x) {
            Some(z) => {
                let x = optimize::normalize(x).expect("point_at normalized it");
                self.points.push(SGPoint::new(z, x));
                true
            }
            None => false,
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.gain()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.gain())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_re(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.z.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_phase(&self) -> f64 {
        self.points.iter().map(|p| p.phase()).fold(0.0, f64::max)
    }
}

fn build_cloud(a: &CMat, cfg: &CloudConfig, kind: CloudKind) -> SGCloud {
    let m = a.nrows();
    let mut cloud = SGCloud::empty(a, kind);
    if m == 0 || linalg::spectral_norm(a) <= EXCLUSION_TOL {
        cloud.zero_matrix = true;
        return cloud;
    }
    if m == 1 {
        let v = a[(0, 0)];
        let z = Complex64::new(v.re, v.im.abs());
        let z = match kind {
            CloudKind::Forward => z,
            CloudKind::Inverse => reciprocal(z),
        };
        cloud.points.push(SGPoint::new(
            z,
            CVec::from_element(1, Complex64::new(1.0, 0.0)),
        ));
        cloud.sample_count = 1;
        return cloud;
    }
    let mut sampler = sampling::UnitSampler::new(cfg.seed, cfg.stream, m);
    for _ in 0..cfg.samples {
        let x = sampler.next_unit();
        cloud.push_witness(&x);
    }
    cloud.sample_count = cfg.samples;
    for x in boundary::structural_witnesses(a) {
        cloud.push_witness(&x);
    }
    for x in boundary::support_witnesses(a, cfg.boundary_dirs) {
        cloud.push_witness(&x);
    }
    if cfg.refine_iters > 0 {
        refine_extremes(&mut cloud, cfg.refine_iters);
        cloud.refined = true;
    }
    cloud
}

/// Pushes the cloud towards its largest and smallest gain and phase.
fn refine_extremes(cloud: &mut SGCloud, iters: usize) {
    if cloud.points.is_empty() {
        return;
    }
    let a = cloud.matrix.clone();
    type Objective = fn(Complex64) -> f64;
    let objectives: [Objective; 4] = [|z| -z.norm(), |z| z.norm(), |z| -z.arg(), |z| z.arg()];
    for obj in objectives {
        let kind = cloud.kind;
        // objective on the forward point; the inverse map only swaps roles
        let seed = cloud
            .points
            .iter()
            .min_by(|p, q| {
                let zp = forward_of(p.z, kind);
                let zq = forward_of(q.z, kind);
                obj(zp).total_cmp(&obj(zq))
            })
            .map(|p| p.witness.clone())
            .expect("nonempty");
        let (x, _) = minimize_on_spheres(
            |b| upper_point(&a, &b[0]).map(obj).unwrap_or(f64::NAN),
            vec![seed],
            iters,
        );
        cloud.push_witness(&x[0]);
    }
}

fn forward_of(z: Complex64, kind: CloudKind) -> Complex64 {
    match kind {
        CloudKind::Forward => z,
        CloudKind::Inverse => reciprocal(z),
    }
}

/// Sampled and refined approximation of `SG(A)`.
pub fn sg_cloud(a: &CMat, cfg: &CloudConfig) -> SGCloud {
    build_cloud(a, cfg, CloudKind::Forward)
}

/// Sampled and refined approximation of `SG^dagger(A)`.
pub fn sg_inverse_cloud(a: &CMat, cfg: &CloudConfig) -> SGCloud {
    build_cloud(a, cfg, CloudKind::Inverse)
}

/// Checks that every nonzero eigenvalue of `A` lies within `tol` of the
/// cloud (either branch). The cloud always contains the eigenvector
/// witnesses, at which the point equals the eigenvalue or its conjugate.
pub fn eig_containment(a: &CMat, cfg: &CloudConfig, tol: f64) -> Result<bool, SgError> {
    let cloud = sg_cloud(a, cfg);
    let scale = linalg::spectral_norm(a);
    for lambda in linalg::complex_eigenvalues(a)? {
        if lambda.norm() <= 1e-12 * scale.max(1.0) {
            continue;
        }
        let d = cloud
            .points
            .iter()
            .map(|p| (p.z - lambda).norm().min((p.z.conj() - lambda).norm()))
            .fold(f64::INFINITY, f64::min);
        if d > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks `SG(U* A U) = SG(A)`: statistics agree to `1e-8` and every cloud
/// point of `A` at witness `x` is reproduced by `U* A U` at `U* x`.
pub fn unitary_invariance_check(a: &CMat, u: &CMat, cfg: &CloudConfig) -> Result<bool, SgError> {
    if !linalg::is_unitary(u, 1e-10) || u.nrows() != a.nrows() {
        return Err(SgError::NotUnitary);
    }
    let b = u.adjoint() * a * u;
    let tol = 1e-8 * linalg::spectral_norm(a).max(1.0);
    let (sa, sb) = (sg_stats(a), sg_stats(&b));
    let stats_ok = (sa.sigma_max - sb.sigma_max).abs() <= tol
        && (sa.sigma_min - sb.sigma_min).abs() <= tol
        && (sa.herm_min_eig - sb.herm_min_eig).abs() <= tol
        && (sa.psi - sb.psi).abs() <= 1e-8;
    if !stats_ok {
        return Ok(false);
    }
    let cloud = sg_cloud(a, cfg);
    let mut image = SGCloud::empty(&b, CloudKind::Forward);
    let mut worst = 0.0f64;
    for p in &cloud.points {
        let y = u.adjoint() * &p.witness;
        match image.point_at(&y) {
            Some(z) => {
                worst = worst.max((z - p.z).norm());
                image.points.push(SGPoint::new(z, y));
            }
            None => return Ok(false),
        }
    }
    if worst > tol {
        return Ok(false);
    }
    let d = sg_distance(&cloud, &image, false)?;
    Ok(d.distance <= tol)
}
