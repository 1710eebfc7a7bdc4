use std::fmt;

use serde::{Deserialize, Serialize};

use super::{sweep_separation, AnalysisError, HonestyLabel, SweepConfig, WorstCase};
use crate::lti::{
    cancellation_check, closed_loop_dominance_oracle, dominance_index, well_posed, Assumption,
    FeedbackLoop,
};
use crate::ratpoly::DEFAULT_TOL;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// The closed loop has `p` poles in the open right half-plane.
    Certified {
        p: usize,
    },
    SeparationFailed,
    AssumptionFailed {
        reason: String,
    },
    /// The graphical test passed but the pole count disagrees: the sweep
    /// missed an intersection.
    OracleConflict {
        graphical: usize,
        oracle: usize,
    },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::Certified { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Certified { p } => write!(f, "certified {p}-dominant"),
            Verdict::SeparationFailed => f.write_str("separation-failed"),
            Verdict::AssumptionFailed { reason } => write!(f, "assumption-failed: {reason}"),
            Verdict::OracleConflict { graphical, oracle } => {
                write!(
                    f,
                    "oracle-conflict: graphical count {graphical}, pole count {oracle}"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub p1: Option<usize>,
    pub p2: Option<usize>,
    pub well_posed: bool,
    pub no_cancellation: bool,
    pub separation_holds: bool,
    /// Measured separation; zero when the sweep was not run.
    #[serde(with = "crate::serde_float")]
    pub margin: f64,
    pub worst: Option<WorstCase>,
    pub label: Option<HonestyLabel>,
    pub pairs_evaluated: usize,
    pub pairs_pruned: usize,
    pub oracle_p: Option<usize>,
    /// Why the pole count is missing, when it is.
    pub oracle_note: Option<String>,
    /// Ascending numerator coefficients of `det(I - P C)`.
    pub phi_numerator: Option<Vec<f64>>,
    pub verdict: Verdict,
    pub diagnostic: Option<String>,
}

impl DominanceReport {
    /// `Some(true)` when the pole count matches `p1 + p2`.
    pub fn oracle_agrees(&self) -> Option<bool> {
        match (self.oracle_p, self.p1, self.p2) {
            (Some(q), Some(a), Some(b)) => Some(q == a + b),
            _ => None,
        }
    }
}

fn failed(reason: String) -> DominanceReport {
    DominanceReport {
        p1: None,
        p2: None,
        well_posed: false,
        no_cancellation: false,
        separation_holds: false,
        margin: 0.0,
        worst: None,
        label: None,
        pairs_evaluated: 0,
        pairs_pruned: 0,
        oracle_p: None,
        oracle_note: None,
        phi_numerator: None,
        verdict: Verdict::AssumptionFailed { reason },
        diagnostic: None,
    }
}

/// Graphical dominance test with pole-count cross-check.
///
/// Never fails: evaluation problems and violated assumptions end up in the
/// verdict. When the sweep certifies `p1 + p2` but the pole count differs,
/// the verdict is a conflict carrying the closest pair found.
pub fn dominance_theorem(l: &FeedbackLoop, cfg: &SweepConfig) -> DominanceReport {
    let (p1, p2) = match (dominance_index(l.p()), dominance_index(l.c())) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) => return failed(format!("P: {e}")),
        (_, Err(e)) => return failed(format!("C: {e}")),
    };
    let mut report = failed(String::new());
    report.p1 = Some(p1);
    report.p2 = Some(p2);
    report.well_posed = well_posed(l);
    report.no_cancellation = match cancellation_check(l, DEFAULT_TOL) {
        Ok(v) => v,
        Err(e) => {
            report.verdict = Verdict::AssumptionFailed {
                reason: e.to_string(),
            };
            return report;
        }
    };
    if !report.well_posed {
        report.verdict = Verdict::AssumptionFailed {
            reason: Assumption::WellPosedness.to_string(),
        };
        return report;
    }
    let sweep = match sweep_separation(l, cfg) {
        Ok(s) => s,
        Err(e) => {
            report.verdict = Verdict::AssumptionFailed {
                reason: e.to_string(),
            };
            return report;
        }
    };
    report.separation_holds = sweep.holds;
    report.margin = sweep.margin;
    report.worst = sweep.worst;
    report.label = Some(sweep.label);
    report.pairs_evaluated = sweep.pairs_evaluated;
    report.pairs_pruned = sweep.pairs_pruned;

    if !report.no_cancellation {
        report.verdict = Verdict::AssumptionFailed {
            reason: Assumption::NoUnstableCancellation.to_string(),
        };
        return report;
    }
    if cfg.run_oracle {
        match closed_loop_dominance_oracle(l) {
            Ok(o) => {
                report.oracle_p = Some(o.p);
                report.phi_numerator = Some(o.phi.num().coeffs().to_vec());
            }
            Err(e) => report.oracle_note = Some(e.to_string()),
        }
    }
    report.verdict = if !report.separation_holds {
        Verdict::SeparationFailed
    } else {
        match report.oracle_p {
            Some(q) if q != p1 + p2 => {
                report.diagnostic = Some(conflict_diagnostic(&report));
                Verdict::OracleConflict {
                    graphical: p1 + p2,
                    oracle: q,
                }
            }
            _ => Verdict::Certified { p: p1 + p2 },
        }
    };
    report
}

fn conflict_diagnostic(r: &DominanceReport) -> String {
    match &r.worst {
        Some(w) => format!(
            "closest pair at omega = {}, tau = {}: distance {:.6e} between {} and {}; witnesses {:?} and {:?}",
            w.omega, w.tau, w.distance, w.z1, w.z2, w.w1, w.w2
        ),
        None => "no finite scaled-graph pair on the grid".into(),
    }
}

/// Measured separation margin, or 0 when separation fails.
pub fn dominance_margin(l: &FeedbackLoop, cfg: &SweepConfig) -> Result<f64, AnalysisError> {
    let s = sweep_separation(l, cfg)?;
    Ok(if s.holds { s.margin } else { 0.0 })
}

/// Stability test for loops of two stable systems.
pub fn stability_check(l: &FeedbackLoop, cfg: &SweepConfig) -> Result<bool, AnalysisError> {
    let p1 = dominance_index(l.p())?;
    let p2 = dominance_index(l.c())?;
    if p1 != 0 || p2 != 0 {
        return Err(AnalysisError::NonzeroIndex { p1, p2 });
    }
    Ok(dominance_theorem(l, cfg).verdict == Verdict::Certified { p: 0 })
}
