//! Dominance analysis of feedback loops from frequency-wise scaled graphs.
//!
//! The sweep checks, on a frequency grid and a grid of loop scalings `tau`,
//! that the scaled graph of `tau P(jw)` stays away from the inverse scaled
//! graph of `C(jw)`. When it does and the loop is well posed without
//! unstable cancellations, the closed loop has exactly `p1 + p2` poles in the
//! open right half-plane. Every certified verdict is cross-checked against
//! the polynomial pole count.

mod corollary;
mod sweep;
mod theorem;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lti::{Frequency, LtiError};
use crate::sgraph::{CloudConfig, SgError};

pub use corollary::{
    corollary_checks, robust_additive, CorollaryReport, CorollaryRow, Disk, RobustReport,
    UncertaintyRegion,
};
pub use sweep::{sweep_separation, HonestyLabel, PairSource, SweepResult, WorstCase};
pub use theorem::{dominance_margin, dominance_theorem, stability_check, DominanceReport, Verdict};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("invalid sweep configuration: {0}")]
    Config(String),
    #[error("uncertainty region frequencies do not match the sweep grid")]
    GridMismatch,
    #[error("open-loop indices are {p1} and {p2}; use dominance_theorem")]
    NonzeroIndex { p1: usize, p2: usize },
    #[error("system has dominance index {found}, expected {expected}")]
    IndexMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Lti(#[from] LtiError),
    #[error(transparent)]
    Sg(#[from] SgError),
}

/// Frequency grid, loop-scaling grid and budgets of a separation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Sorted nonnegative frequencies; may end with `Frequency::Infinite`.
    pub omegas: Vec<Frequency>,
    /// Loop scalings in `(0, 1]`.
    pub taus: Vec<f64>,
    pub cloud: CloudConfig,
    /// Separation threshold.
    pub eps: f64,
    /// Closest pairs that get a joint witness descent after the sweep.
    pub refine_top_k: usize,
    /// Local minima of the eigen-witness distance refined in frequency.
    pub omega_refine: usize,
    /// Run the polynomial pole count alongside the graphical test.
    pub run_oracle: bool,
}

pub const DEFAULT_WMIN: f64 = 1e-3;
pub const DEFAULT_WMAX: f64 = 1e3;
pub const DEFAULT_WPOINTS: usize = 400;
pub const DEFAULT_TAUPOINTS: usize = 20;
pub const DEFAULT_EPS: f64 = 1e-6;
pub const DEFAULT_REFINE_TOP_K: usize = 8;
pub const DEFAULT_OMEGA_REFINE: usize = 4;

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omegas: log_grid(DEFAULT_WMIN, DEFAULT_WMAX, DEFAULT_WPOINTS),
            taus: uniform_taus(DEFAULT_TAUPOINTS),
            cloud: CloudConfig::default(),
            eps: DEFAULT_EPS,
            refine_top_k: DEFAULT_REFINE_TOP_K,
            omega_refine: DEFAULT_OMEGA_REFINE,
            run_oracle: true,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.omegas.is_empty() || self.taus.is_empty() {
            return Err(AnalysisError::Config("grids must be nonempty".into()));
        }
        let mut prev = -1.0f64;
        for (k, w) in self.omegas.iter().enumerate() {
            match *w {
                Frequency::Finite(v) => {
                    if !(v >= 0.0 && v.is_finite()) || v <= prev {
                        return Err(AnalysisError::Config(format!(
                            "frequencies must be finite, nonnegative and strictly increasing (entry {k})"
                        )));
                    }
                    prev = v;
                }
                Frequency::Infinite => {
                    if k + 1 != self.omegas.len() {
                        return Err(AnalysisError::Config(
                            "the infinite frequency must come last".into(),
                        ));
                    }
                }
            }
        }
        if self.taus.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(AnalysisError::Config(
                "loop scalings must lie in (0, 1]".into(),
            ));
        }
        if !(self.eps >= 0.0) {
            return Err(AnalysisError::Config("eps must be nonnegative".into()));
        }
        Ok(())
    }
}

/// `0`, `points` log-spaced frequencies on `[wmin, wmax]`, and infinity.
pub fn log_grid(wmin: f64, wmax: f64, points: usize) -> Vec<Frequency> {
    let mut out = vec![Frequency::Finite(0.0)];
    if points == 1 {
        out.push(Frequency::Finite(wmin));
    } else if points > 1 {
        let (a, b) = (wmin.log10(), wmax.log10());
        for k in 0..points {
            let e = a + (b - a) * k as f64 / (points - 1) as f64;
            out.push(Frequency::Finite(10f64.powf(e)));
        }
    }
    out.push(Frequency::Infinite);
    out
}

/// `k / n` for `k = 1..=n`.
pub fn uniform_taus(n: usize) -> Vec<f64> {
    (1..=n).map(|k| k as f64 / n as f64).collect()
}
