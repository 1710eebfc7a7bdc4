use std::fs;
use std::path::Path;

use num_complex::Complex64;
use sgdom_core::analysis::{corollary_checks, dominance_theorem, CorollaryRow, Verdict};
use sgdom_core::linalg;
use sgdom_core::lti::{
    closed_loop_dominance_oracle, det_char, FeedbackLoop, Frequency, LtiError, TransferMatrix,
};
use sgdom_core::principal::{
    principal_region, principal_values, region_contains, PrincipalRegion, RegionKind,
};
use sgdom_core::sgraph::{sg_cloud, CloudConfig};

use crate::plot::{self, CloudRow, KIND_CLOUD, KIND_EIG};
use crate::report::{Provenance, ReportDocument, TOOL};
use crate::system::load_system;
use crate::{GridArgs, LoopArgs, Mode};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SEPARATION: u8 = 2;
pub const EXIT_ASSUMPTION: u8 = 3;
pub const EXIT_CONFLICT: u8 = 4;

const CONTAINMENT_TOL: f64 = 1e-8;
const REGION_TOL: f64 = 1e-9;

type CmdResult = Result<u8, String>;

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), String> {
    fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_loop(lp: &LoopArgs, tol: f64) -> Result<FeedbackLoop, String> {
    let p = load_system(&lp.plant, tol).map_err(|e| e.to_string())?;
    let c = load_system(&lp.controller, tol).map_err(|e| e.to_string())?;
    let r = if lp.negate_c {
        FeedbackLoop::negative(p, c)
    } else {
        FeedbackLoop::new(p, c)
    };
    r.map_err(|e| e.to_string())
}

fn display_name(g: &TransferMatrix, path: &Path) -> String {
    if g.name().is_empty() {
        path.display().to_string()
    } else {
        format!("{} ({})", g.name(), path.display())
    }
}

fn eval(g: &TransferMatrix, w: Frequency) -> Result<linalg::CMat, String> {
    g.eval(w)
        .map_err(|e: LtiError| format!("evaluation at omega = {w}: {e}"))
}

/// Eigenvalues not within tolerance of any cloud point, out of the nonzero
/// ones.
fn eig_misses(eigs: &[Complex64], rows: &[CloudRow]) -> (usize, usize) {
    let mut total = 0;
    let mut missed = 0;
    for &l in eigs {
        if l.norm() <= 1e-14 {
            continue;
        }
        total += 1;
        let d = rows
            .iter()
            .map(|r| (r.z - l).norm())
            .fold(f64::INFINITY, f64::min);
        if d > CONTAINMENT_TOL * l.norm().max(1.0) {
            missed += 1;
        }
    }
    (missed, total)
}

pub fn sg(system: &Path, grid: &GridArgs, out: Option<&Path>) -> CmdResult {
    let cfg = grid.sweep(false)?;
    let g = load_system(system, grid.tol).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    let mut sup = 0.0f64;
    let mut min_re = f64::INFINITY;
    let (mut missed, mut total) = (0, 0);
    if g.is_zero() {
        eprintln!("warning: zero system, its scaled graph is the origin; no points written");
    } else {
        for (k, &w) in cfg.omegas.iter().enumerate() {
            let a = eval(&g, w)?;
            let cloud = sg_cloud(
                &a,
                &CloudConfig {
                    stream: 4 * k as u64,
                    ..cfg.cloud.clone()
                },
            );
            let start = rows.len();
            for p in cloud.points() {
                sup = sup.max(p.gain());
                min_re = min_re.min(p.z().re);
                rows.extend(plot::branch_pair(w, 1.0, p.z_plus(), KIND_CLOUD));
            }
            let eigs = linalg::complex_eigenvalues(&a).map_err(|e| e.to_string())?;
            let (m, t) = eig_misses(&eigs, &rows[start..]);
            missed += m;
            total += t;
            for l in eigs {
                rows.extend(plot::branch_pair(w, 1.0, l, KIND_EIG));
            }
        }
    }
    let csv = plot::write_csv(&rows).map_err(|e| e.to_string())?;
    if let Some(dir) = out {
        let svg = plot::cloud_svg(&csv, &format!("Scaled graph of {}", g.name()), None)?;
        write_file(dir, "sg.csv", &csv)?;
        write_file(dir, "sg.svg", &svg)?;
    }
    let points = rows
        .iter()
        .filter(|r| r.kind == KIND_CLOUD && r.upper)
        .count();
    println!("system: {}", display_name(&g, system));
    println!("frequencies: {}", cfg.omegas.len());
    println!("points: {points}");
    if points > 0 {
        println!("sup |z|: {sup}");
        println!("min Re z: {min_re}");
    }
    println!("eigenvalues inside the cloud: {}/{}", total - missed, total);
    Ok(EXIT_OK)
}

pub fn feedback(
    lp: &LoopArgs,
    grid: &GridArgs,
    oracle: bool,
    json: bool,
    out: Option<&Path>,
) -> CmdResult {
    let cfg = grid.sweep(oracle)?;
    let l = load_loop(lp, grid.tol)?;
    let report = dominance_theorem(&l, &cfg);
    let code = match report.verdict {
        Verdict::Certified { .. } => EXIT_OK,
        Verdict::SeparationFailed => EXIT_SEPARATION,
        Verdict::AssumptionFailed { .. } => EXIT_ASSUMPTION,
        Verdict::OracleConflict { .. } => EXIT_CONFLICT,
    };
    let doc = ReportDocument {
        provenance: Provenance {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            plant: display_name(l.p(), &lp.plant),
            controller: display_name(l.c(), &lp.controller),
            negate_c: lp.negate_c,
            tol: grid.tol,
            config: cfg,
        },
        report,
    };
    let (text, js) = (doc.to_text(), doc.to_json());
    if let Some(dir) = out {
        write_file(dir, "report.txt", &text)?;
        write_file(dir, "report.json", &format!("{js}\n"))?;
    }
    if json {
        println!("{js}");
    } else {
        print!("{text}");
    }
    Ok(code)
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || format!("--point expects \"re,im\", got {s:?}");
    match parts.as_slice() {
        [re] => Ok(Complex64::new(re.parse().map_err(|_| bad())?, 0.0)),
        [re, im] => Ok(Complex64::new(
            re.parse().map_err(|_| bad())?,
            im.parse().map_err(|_| bad())?,
        )),
        _ => Err(bad()),
    }
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| plot::fmt_float(*x))
        .collect::<Vec<_>>()
        .join(";")
}

fn describe_region(r: &PrincipalRegion) -> String {
    match (r.kind, r.phi_min, r.phi_max) {
        (RegionKind::Rectangle, Some(lo), Some(hi)) => {
            if r.r_max - r.r_min <= 1e-12 && hi - lo <= 1e-12 {
                let z = Complex64::from_polar(r.r_max, hi);
                if z.im.abs() <= 1e-15 {
                    format!("point {}", z.re)
                } else {
                    format!("point {z}")
                }
            } else {
                format!(
                    "rectangle r in [{}, {}], phase in [{lo}, {hi}]",
                    r.r_min, r.r_max
                )
            }
        }
        _ => format!("annulus r in [{}, {}]", r.r_min, r.r_max),
    }
}

pub fn principal(
    system: &Path,
    grid: &GridArgs,
    omega: Option<f64>,
    point: &str,
    out: Option<&Path>,
) -> CmdResult {
    let target = parse_point(point)?;
    let g = load_system(system, grid.tol).map_err(|e| e.to_string())?;
    let omegas = match omega {
        Some(w) if w >= 0.0 => vec![Frequency::from(w)],
        Some(w) => return Err(format!("--omega must be nonnegative, got {w}")),
        None => grid.sweep(false)?.omegas,
    };
    let mut table = csv::Writer::from_writer(Vec::new());
    table
        .write_record([
            "omega",
            "region",
            "r_min",
            "r_max",
            "phi_min",
            "phi_max",
            "gains",
            "phases",
            "point_inside",
            "eig_inside",
        ])
        .map_err(|e| e.to_string())?;
    let mut regions = Vec::new();
    let mut eig_rows = Vec::new();
    let (mut inside_total, mut eig_total) = (0, 0);
    println!("system: {}", display_name(&g, system));
    for &w in &omegas {
        let a = eval(&g, w)?;
        let d = principal_values(&a).map_err(|e| e.to_string())?;
        let r = principal_region(&a).map_err(|e| e.to_string())?;
        let eigs = linalg::complex_eigenvalues(&a).map_err(|e| e.to_string())?;
        let nonzero: Vec<Complex64> = eigs.iter().copied().filter(|l| l.norm() > 1e-14).collect();
        let inside = nonzero
            .iter()
            .filter(|&&l| region_contains(&r, l, REGION_TOL))
            .count();
        inside_total += inside;
        eig_total += nonzero.len();
        let pin = region_contains(&r, target, REGION_TOL);
        println!("omega = {w}");
        println!(
            "  gains: {}",
            d.gains
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        println!(
            "  phases: {}",
            d.phases
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        println!("  region: {}", describe_region(&r));
        println!(
            "  {} inside: {}",
            plot::fmt_point(target),
            if pin { "yes" } else { "no" }
        );
        println!("  eigenvalues inside: {inside}/{}", nonzero.len());
        let opt = |x: Option<f64>| x.map(plot::fmt_float).unwrap_or_default();
        table
            .write_record([
                plot::fmt_float(w.value()),
                match r.kind {
                    RegionKind::Rectangle => "rectangle".into(),
                    RegionKind::Annulus => "annulus".into(),
                },
                plot::fmt_float(r.r_min),
                plot::fmt_float(r.r_max),
                opt(r.phi_min),
                opt(r.phi_max),
                join(&d.gains),
                join(&d.phases),
                pin.to_string(),
                format!("{inside}/{}", nonzero.len()),
            ])
            .map_err(|e| e.to_string())?;
        for l in eigs {
            eig_rows.extend(plot::branch_pair(w, 1.0, l, KIND_EIG));
        }
        regions.push(r);
    }
    println!("eigenvalues inside their regions: {inside_total}/{eig_total}");
    if let Some(dir) = out {
        let bytes = table.into_inner().map_err(|e| e.to_string())?;
        let region_csv = String::from_utf8(bytes).expect("csv output is utf-8");
        let eig_csv = plot::write_csv(&eig_rows).map_err(|e| e.to_string())?;
        let svg = plot::principal_svg(
            &regions,
            &eig_csv,
            &format!("Principal regions of {}", g.name()),
            Some(target),
        )?;
        write_file(dir, "principal.csv", &region_csv)?;
        write_file(dir, "principal_eig.csv", &eig_csv)?;
        write_file(dir, "principal.svg", &svg)?;
    }
    Ok(EXIT_OK)
}

pub fn certify(lp: &LoopArgs, grid: &GridArgs, mode: Mode) -> CmdResult {
    let cfg = grid.sweep(false)?;
    let l = load_loop(lp, grid.tol)?;
    let rep = corollary_checks(&l, &cfg).map_err(|e| e.to_string())?;
    let (name, holds, binding, value): (&str, bool, usize, fn(&CorollaryRow) -> f64) = match mode {
        Mode::Gain => ("small gain", rep.small_gain, rep.binding_gain, |r| {
            r.gain_product
        }),
        Mode::Phase => ("small phase", rep.small_phase, rep.binding_phase, |r| {
            r.phase_sum
        }),
        Mode::Passivity => ("passivity", rep.passivity, rep.binding_passivity, |r| {
            r.passivity_slack()
        }),
    };
    let column = match mode {
        Mode::Gain => "sigma_max(P) sigma_max(C)",
        Mode::Phase => "psi(P) + psi(C)",
        Mode::Passivity => "passivity slack",
    };
    println!("omega,{column}");
    for r in &rep.rows {
        println!("{},{}", r.omega, value(r));
    }
    let b = &rep.rows[binding];
    println!(
        "binding frequency: omega = {} ({column} = {})",
        b.omega,
        value(b)
    );
    println!("{name}: {}", if holds { "holds" } else { "fails" });
    Ok(if holds { EXIT_OK } else { EXIT_SEPARATION })
}

/// `c_n s^n + ... + c_0` with descending powers.
fn poly_string(c: &[f64]) -> String {
    let mut s = String::new();
    for (k, &x) in c.iter().enumerate().rev() {
        if x == 0.0 && c.len() > 1 {
            continue;
        }
        let mag = x.abs();
        if s.is_empty() {
            if x < 0.0 {
                s.push('-');
            }
        } else {
            s.push_str(if x < 0.0 { " - " } else { " + " });
        }
        let coeff = if mag == 1.0 && k > 0 {
            String::new()
        } else {
            format!("{mag}")
        };
        let sep = if coeff.is_empty() || k == 0 { "" } else { " " };
        let pow = match k {
            0 => String::new(),
            1 => "s".into(),
            _ => format!("s^{k}"),
        };
        s.push_str(&format!("{coeff}{sep}{pow}"));
    }
    if s.is_empty() {
        "0".into()
    } else {
        s
    }
}

pub fn oracle(lp: &LoopArgs, tol: f64) -> CmdResult {
    let l = load_loop(lp, tol)?;
    let phi = det_char(&l).map_err(|e| e.to_string())?;
    let num = phi.num().coeffs();
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    println!("phi numerator: {}", poly_string(num));
    println!("phi numerator coefficients (ascending): [{}]", list(num));
    println!("phi denominator: {}", poly_string(phi.den().coeffs()));
    if !phi.is_zero() {
        let zeros = phi.zeros(tol).map_err(|e| e.to_string())?;
        println!(
            "phi numerator zeros in the open right half-plane: {}",
            zeros.count_where(|z| z.re > 0.0)
        );
    }
    match closed_loop_dominance_oracle(&l) {
        Ok(o) => {
            println!("open-loop unstable poles: P {}, C {}", o.p1, o.p2);
            println!("closed-loop unstable poles: {}", o.p);
            Ok(EXIT_OK)
        }
        Err(LtiError::Assumption(a)) => {
            println!("closed-loop unstable poles: unavailable, assumption failed: {a}");
            Ok(EXIT_ASSUMPTION)
        }
        Err(e) => Err(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_rendering() {
        assert_eq!(
            poly_string(&[-6.0, 6.0, -3.0, -2.0, 1.0]),
            "s^4 - 2 s^3 - 3 s^2 + 6 s - 6"
        );
        assert_eq!(poly_string(&[1.0]), "1");
        assert_eq!(poly_string(&[0.0, -1.0]), "-s");
        assert_eq!(poly_string(&[0.5, 0.0, 2.0]), "2 s^2 + 0.5");
    }

    #[test]
    fn test_points() {
        assert_eq!(parse_point("-1,0").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_point("2").unwrap(), Complex64::new(2.0, 0.0));
        assert!(parse_point("a,b").is_err());
    }
}
