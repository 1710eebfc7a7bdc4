//! CSV export of point clouds and SVG rendering from that CSV.

use std::collections::HashSet;
use std::fmt::Write as _;

use num_complex::Complex64;
use sgdom_core::lti::Frequency;
use sgdom_core::principal::{PrincipalRegion, RegionKind};

pub const CSV_HEADER: [&str; 6] = ["omega", "tau", "re", "im", "branch", "kind"];

pub const KIND_CLOUD: &str = "sg";
pub const KIND_EIG: &str = "eig";

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const PAD: f64 = 24.0;

/// One exported point. Every point appears with its conjugate, the upper
/// branch carrying the nonnegative imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudRow {
    pub omega: f64,
    pub tau: f64,
    pub z: Complex64,
    pub upper: bool,
    pub kind: String,
}

pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn parse_float(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Both branches of `z`, upper first.
pub fn branch_pair(omega: Frequency, tau: f64, z: Complex64, kind: &str) -> [CloudRow; 2] {
    let up = if z.im >= 0.0 { z } else { z.conj() };
    let row = |z, upper| CloudRow {
        omega: omega.value(),
        tau,
        z,
        upper,
        kind: kind.to_string(),
    };
    [row(up, true), row(up.conj(), false)]
}

pub fn write_csv(rows: &[CloudRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_float(r.omega),
            fmt_float(r.tau),
            fmt_float(r.z.re),
            fmt_float(r.z.im),
            if r.upper { "upper" } else { "lower" }.to_string(),
            r.kind.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_csv(text: &str) -> Result<Vec<CloudRow>, String> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut out = Vec::new();
    for (k, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let num = |i: usize| {
            parse_float(&rec[i]).ok_or_else(|| format!("row {}: bad number {:?}", k + 1, &rec[i]))
        };
        out.push(CloudRow {
            omega: num(0)?,
            tau: num(1)?,
            z: Complex64::new(num(2)?, num(3)?),
            upper: &rec[4] == "upper",
            kind: rec[5].to_string(),
        });
    }
    Ok(out)
}

/// Equal-aspect map from the upper half-plane box onto the canvas.
struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
}

impl Frame {
    fn fit(xmin: f64, xmax: f64, ymax: f64) -> Self {
        let (xmin, xmax) = (xmin.min(-0.1), xmax.max(0.1));
        let ymax = ymax.max(0.1);
        let dx = (xmax - xmin) * 1.05;
        let dy = ymax * 1.05;
        let scale = ((WIDTH - 2.0 * PAD) / dx).min((HEIGHT - 2.0 * PAD) / dy);
        let cx = 0.5 * (xmin + xmax);
        Frame {
            x0: cx - 0.5 * (WIDTH - 2.0 * PAD) / scale,
            y1: dy,
            scale,
        }
    }

    fn x(&self, re: f64) -> f64 {
        PAD + (re - self.x0) * self.scale
    }

    fn y(&self, im: f64) -> f64 {
        PAD + (self.y1 - im) * self.scale
    }

    fn open(&self, title: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">
<title>{}</title>
<defs><clipPath id="uhp"><rect x="0" y="0" width="{WIDTH}" height="{:.2}"/></clipPath></defs>
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#,
            escape(title),
            self.y(0.0)
        );
        let (ya, xa) = (self.y(0.0), self.x(0.0));
        let _ = writeln!(
            s,
            r##"<g stroke="#444" stroke-width="0.8"><line x1="{PAD}" y1="{ya:.2}" x2="{:.2}" y2="{ya:.2}"/><line x1="{xa:.2}" y1="{PAD}" x2="{xa:.2}" y2="{ya:.2}"/></g>"##,
            WIDTH - PAD
        );
        s
    }

    fn marker(&self, s: &mut String, z: Complex64, label: &str) {
        let _ = writeln!(
            s,
            r##"<g><path d="M {x0:.2} {y:.2} L {x1:.2} {y:.2} M {x:.2} {ya:.2} L {x:.2} {yb:.2}" stroke="black" stroke-width="1.2"/><text x="{x:.2}" y="{yt:.2}" font-size="10" text-anchor="middle">{}</text></g>"##,
            escape(label),
            x0 = self.x(z.re) - 4.0,
            x1 = self.x(z.re) + 4.0,
            x = self.x(z.re),
            y = self.y(z.im),
            ya = self.y(z.im) - 4.0,
            yb = self.y(z.im) + 4.0,
            yt = self.y(z.im) + 14.0,
        );
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn kind_style(kind: &str) -> (&'static str, f64) {
    match kind {
        KIND_EIG => ("#d62728", 1.6),
        _ => ("#6baed6", 1.1),
    }
}

/// Upper-branch rows of the CSV as dots. Rows landing in an already drawn
/// half-pixel cell are skipped, so every dot is some CSV row.
pub fn cloud_svg(csv_text: &str, title: &str, marker: Option<Complex64>) -> Result<String, String> {
    let rows = read_csv(csv_text)?;
    let upper: Vec<&CloudRow> = rows
        .iter()
        .filter(|r| r.upper && r.z.re.is_finite() && r.z.im.is_finite())
        .collect();
    let mut xmin = 0.0f64;
    let mut xmax = 0.0f64;
    let mut ymax = 0.0f64;
    for r in &upper {
        xmin = xmin.min(r.z.re);
        xmax = xmax.max(r.z.re);
        ymax = ymax.max(r.z.im);
    }
    if let Some(m) = marker {
        xmin = xmin.min(m.re);
        xmax = xmax.max(m.re);
    }
    let f = Frame::fit(xmin, xmax, ymax);
    let mut s = f.open(title);
    // clouds first so eigenvalues stay visible on top
    for kind in [KIND_CLOUD, KIND_EIG] {
        let (color, r) = kind_style(kind);
        let _ = writeln!(s, r#"<g fill="{color}" class="{kind}">"#);
        let mut seen = HashSet::new();
        for p in upper.iter().filter(|p| p.kind == kind) {
            let (x, y) = (f.x(p.z.re), f.y(p.z.im));
            if !seen.insert(((2.0 * x).round() as i64, (2.0 * y).round() as i64)) {
                continue;
            }
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}"/>"#);
        }
        s.push_str("</g>\n");
    }
    if let Some(m) = marker {
        f.marker(&mut s, m, &fmt_point(m));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn fmt_point(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else {
        format!("{}{:+}j", z.re, z.im)
    }
}

/// Region outlines plus the eigenvalue rows of `eig_csv`.
pub fn principal_svg(
    regions: &[PrincipalRegion],
    eig_csv: &str,
    title: &str,
    marker: Option<Complex64>,
) -> Result<String, String> {
    let rows = read_csv(eig_csv)?;
    let mut r_out = regions.iter().map(|r| r.r_max).fold(0.0f64, f64::max);
    for p in rows.iter().filter(|p| p.upper) {
        r_out = r_out.max(p.z.norm());
    }
    if let Some(m) = marker {
        r_out = r_out.max(m.norm());
    }
    let r_out = if r_out.is_finite() && r_out > 0.0 {
        r_out
    } else {
        1.0
    };
    let f = Frame::fit(-r_out, r_out, r_out);
    let mut s = f.open(title);
    s.push_str(r##"<g fill="none" stroke="#2ca02c" stroke-width="0.6" stroke-opacity="0.5" clip-path="url(#uhp)">"##);
    s.push('\n');
    let (cx, cy) = (f.x(0.0), f.y(0.0));
    for r in regions {
        match (r.kind, r.phi_min, r.phi_max) {
            (RegionKind::Rectangle, Some(lo), Some(hi)) => {
                let pt = |rad: f64, t: f64| (f.x(rad * t.cos()), f.y(rad * t.sin()));
                if r.r_max - r.r_min <= 1e-12 && hi - lo <= 1e-12 {
                    let (x, y) = pt(r.r_max, lo);
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3"/>"#);
                    continue;
                }
                let (a, b) = (r.r_min * f.scale, r.r_max * f.scale);
                let (x1, y1) = pt(r.r_min, lo);
                let (x2, y2) = pt(r.r_max, lo);
                let (x3, y3) = pt(r.r_max, hi);
                let (x4, y4) = pt(r.r_min, hi);
                let _ = writeln!(
                    s,
                    r#"<path d="M {x1:.2} {y1:.2} L {x2:.2} {y2:.2} A {b:.2} {b:.2} 0 0 0 {x3:.2} {y3:.2} L {x4:.2} {y4:.2} A {a:.2} {a:.2} 0 0 1 {x1:.2} {y1:.2} Z"/>"#
                );
            }
            _ => {
                for rad in [r.r_min, r.r_max] {
                    if rad > 0.0 {
                        let _ = writeln!(
                            s,
                            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}"/>"#,
                            rad * f.scale
                        );
                    }
                }
            }
        }
    }
    s.push_str("</g>\n");
    let (color, rad) = kind_style(KIND_EIG);
    let _ = writeln!(s, r#"<g fill="{color}" class="{KIND_EIG}">"#);
    for p in rows.iter().filter(|p| p.upper && p.kind == KIND_EIG) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{rad}"/>"#,
            f.x(p.z.re),
            f.y(p.z.im)
        );
    }
    s.push_str("</g>\n");
    if let Some(m) = marker {
        f.marker(&mut s, m, &fmt_point(m));
    }
    s.push_str("</svg>\n");
    Ok(s)
}
