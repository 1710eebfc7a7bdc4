use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, SweepConfig};
use crate::linalg::{self, CMat};
use crate::lti::{dominance_index, FeedbackLoop, Frequency, TransferMatrix};
use crate::sgraph::{sg_inverse_cloud, sg_stats};

/// Slack for the positive semidefinite test on `P + P*`.
const PSD_TOL: f64 = 1e-12;

/// Per-frequency quantities behind the gain, phase and passivity conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryRow {
    pub omega: Frequency,
    /// `sigma_max(P) * sigma_max(C)`.
    pub gain_product: f64,
    /// `psi(P) + psi(-C)`.
    pub phase_sum: f64,
    /// Smallest eigenvalue of `P + P*`.
    pub p_herm_min: f64,
    /// Largest eigenvalue of `C + C*`.
    pub c_herm_max: f64,
}

impl CorollaryRow {
    pub fn small_gain(&self) -> bool {
        self.gain_product < 1.0
    }

    pub fn small_phase(&self) -> bool {
        self.phase_sum < std::f64::consts::PI
    }

    pub fn passive(&self) -> bool {
        self.p_herm_min >= -PSD_TOL && self.c_herm_max < 0.0
    }

    /// Distance of the passivity condition from failing; negative on failure.
    pub fn passivity_slack(&self) -> f64 {
        (self.p_herm_min + PSD_TOL).min(-self.c_herm_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub small_gain: bool,
    pub small_phase: bool,
    pub passivity: bool,
    pub rows: Vec<CorollaryRow>,
    /// Row with the largest gain product.
    pub binding_gain: usize,
    /// Row with the largest phase sum.
    pub binding_phase: usize,
    /// Row with the smallest passivity slack.
    pub binding_passivity: usize,
}

fn corollary_row(l: &FeedbackLoop, w: Frequency) -> Result<CorollaryRow, AnalysisError> {
    let pm = l.p().eval(w)?;
    let cm = l.c().eval(w)?;
    let sp = sg_stats(&pm);
    let sc = sg_stats(&(-&cm));
    let c_herm = &cm + cm.adjoint();
    let (cv, _) = linalg::hermitian_eig(&c_herm);
    Ok(CorollaryRow {
        omega: w,
        gain_product: sp.sigma_max * linalg::spectral_norm(&cm),
        phase_sum: sp.psi + sc.psi,
        p_herm_min: 2.0 * sp.herm_min_eig,
        c_herm_max: cv.last().copied().unwrap_or(0.0),
    })
}

fn arg_best(rows: &[CorollaryRow], key: impl Fn(&CorollaryRow) -> f64) -> usize {
    let mut best = 0;
    for (k, r) in rows.iter().enumerate() {
        if key(r) > key(&rows[best]) {
            best = k;
        }
    }
    best
}

/// Small-gain, small-phase and passivity conditions on the finite grid
/// frequencies, from exact matrix statistics.
pub fn corollary_checks(
    l: &FeedbackLoop,
    cfg: &SweepConfig,
) -> Result<CorollaryReport, AnalysisError> {
    cfg.validate()?;
    let omegas: Vec<Frequency> = cfg
        .omegas
        .iter()
        .copied()
        .filter(|w| !w.is_infinite())
        .collect();
    if omegas.is_empty() {
        return Err(AnalysisError::Config(
            "no finite frequency in the grid".into(),
        ));
    }
    let rows: Vec<CorollaryRow> = omegas
        .par_iter()
        .map(|&w| corollary_row(l, w))
        .collect::<Result<_, _>>()?;
    Ok(CorollaryReport {
        small_gain: rows.iter().all(CorollaryRow::small_gain),
        small_phase: rows.iter().all(CorollaryRow::small_phase),
        passivity: rows.iter().all(CorollaryRow::passive),
        binding_gain: arg_best(&rows, |r| r.gain_product),
        binding_phase: arg_best(&rows, |r| r.phase_sum),
        binding_passivity: arg_best(&rows, |r| -r.passivity_slack()),
        rows,
    })
}

/// Disk in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Result<Self, AnalysisError> {
        if !(radius >= 0.0 && radius.is_finite())
            || !center.re.is_finite()
            || !center.im.is_finite()
        {
            return Err(AnalysisError::Config(
                "disk radius must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { center, radius })
    }

    /// Distance from `z` to `tau` times the disk and its mirror image.
    fn scaled_distance(&self, z: Complex64, tau: f64) -> f64 {
        let c = self.center * tau;
        let d = (z - c).norm().min((z.conj() - c).norm());
        (d - tau * self.radius).max(0.0)
    }
}

/// Additive uncertainty as a disk per frequency. A center off the real axis
/// stands for the disk together with its mirror image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum UncertaintyRegion {
    Constant(Disk),
    /// One disk per sweep frequency, in grid order.
    Tabulated(Vec<(Frequency, Disk)>),
}

impl UncertaintyRegion {
    fn disks_for(&self, omegas: &[Frequency]) -> Result<Vec<Disk>, AnalysisError> {
        match self {
            UncertaintyRegion::Constant(d) => Ok(vec![*d; omegas.len()]),
            UncertaintyRegion::Tabulated(t) => {
                if t.len() != omegas.len() || t.iter().zip(omegas).any(|((w, _), g)| w != g) {
                    return Err(AnalysisError::GridMismatch);
                }
                Ok(t.iter().map(|(_, d)| *d).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustReport {
    pub holds: bool,
    #[serde(with = "crate::serde_float")]
    pub min_distance: f64,
    pub worst_omega: Option<Frequency>,
    pub worst_tau: Option<f64>,
}

/// Robust dominance under additive uncertainty bounded by `rho`.
///
/// `g` is the nominal map seen by the uncertainty and must be `p`-dominant.
/// Checks that the inverse scaled graph of `g(jw)` stays more than `eps` away
/// from `tau rho(w)` for every grid frequency and `tau` in `{0} + taus`.
pub fn robust_additive(
    g: &TransferMatrix,
    p: usize,
    rho: &UncertaintyRegion,
    cfg: &SweepConfig,
) -> Result<RobustReport, AnalysisError> {
    cfg.validate()?;
    let found = dominance_index(g)?;
    if found != p {
        return Err(AnalysisError::IndexMismatch { expected: p, found });
    }
    let disks = rho.disks_for(&cfg.omegas)?;
    let mut taus = vec![0.0];
    taus.extend(cfg.taus.iter().copied());
    let per_freq: Vec<(f64, f64)> = (0..cfg.omegas.len())
        .into_par_iter()
        .map(|k| -> Result<(f64, f64), AnalysisError> {
            let gm: CMat = g.eval(cfg.omegas[k])?;
            let mut ccfg = cfg.cloud.clone();
            ccfg.stream = 4 * k as u64 + 2;
            let cloud = sg_inverse_cloud(&gm, &ccfg);
            let mut best = (f64::INFINITY, 0.0);
            for &tau in &taus {
                for pt in cloud.points() {
                    let d = disks[k].scaled_distance(pt.z(), tau);
                    if d < best.0 {
                        best = (d, tau);
                    }
                }
            }
            Ok(best)
        })
        .collect::<Result<_, _>>()?;
    let mut out = RobustReport {
        holds: true,
        min_distance: f64::INFINITY,
        worst_omega: None,
        worst_tau: None,
    };
    for (k, &(d, tau)) in per_freq.iter().enumerate() {
        if d < out.min_distance {
            out.min_distance = d;
            out.worst_omega = Some(cfg.omegas[k]);
            out.worst_tau = Some(tau);
        }
    }
    out.holds = out.min_distance > cfg.eps;
    Ok(out)
}
