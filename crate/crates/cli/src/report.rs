//! Feedback reports: a plain-text rendering and a JSON twin.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sgdom_core::analysis::{DominanceReport, SweepConfig};

pub const TOOL: &str = "sgdom";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub plant: String,
    pub controller: String,
    pub negate_c: bool,
    pub tol: f64,
    pub config: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub provenance: Provenance,
    pub report: DominanceReport,
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn count(c: Option<usize>) -> String {
    c.map_or_else(|| "?".into(), |v| v.to_string())
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let r = &self.report;
        let cfg = &p.config;
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", p.tool, p.version);
        let _ = writeln!(s, "plant: {}", p.plant);
        let _ = writeln!(
            s,
            "controller: {}{}",
            p.controller,
            if p.negate_c { " (negated)" } else { "" }
        );
        let _ = writeln!(
            s,
            "grid: {} frequencies, {} loop scalings, {} samples, {} refinement steps, seed {}",
            cfg.omegas.len(),
            cfg.taus.len(),
            cfg.cloud.samples,
            cfg.cloud.refine_iters,
            cfg.cloud.seed
        );
        let _ = writeln!(s, "eps: {:e}, tol: {:e}", cfg.eps, p.tol);
        let _ = writeln!(s);
        let _ = writeln!(s, "verdict: {}", r.verdict);
        let _ = writeln!(s, "open-loop indices: P {}, C {}", count(r.p1), count(r.p2));
        let _ = writeln!(s, "well-posed: {}", yes_no(r.well_posed));
        let _ = writeln!(
            s,
            "no unstable pole-zero cancellation: {}",
            yes_no(r.no_cancellation)
        );
        let _ = writeln!(
            s,
            "separation: {}",
            if r.separation_holds { "holds" } else { "fails" }
        );
        let _ = writeln!(s, "margin: {}", r.margin);
        if let Some(label) = r.label {
            let _ = writeln!(s, "label: {label}");
        }
        if let Some(w) = &r.worst {
            let _ = writeln!(
                s,
                "worst pair: omega = {}, tau = {}, distance = {}, z1 = {}, z2 = {}",
                w.omega, w.tau, w.distance, w.z1, w.z2
            );
        }
        let _ = writeln!(
            s,
            "pairs: {} evaluated, {} pruned",
            r.pairs_evaluated, r.pairs_pruned
        );
        match (r.oracle_p, &r.oracle_note) {
            (Some(q), _) => {
                let agree = match r.oracle_agrees() {
                    Some(true) => "equals p1 + p2",
                    Some(false) => "differs from p1 + p2",
                    None => "not compared",
                };
                let _ = writeln!(s, "pole count: {q} ({agree})");
            }
            (None, Some(note)) => {
                let _ = writeln!(s, "pole count: unavailable ({note})");
            }
            (None, None) => {
                let _ = writeln!(s, "pole count: not run");
            }
        }
        if let Some(d) = &r.diagnostic {
            let _ = writeln!(s, "diagnostic: {d}");
        }
        s
    }
}
