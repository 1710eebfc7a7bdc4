//! System description files.
//!
//! A file is a JSON object with a `kind` tag:
//!
//! ```json
//! { "name": "P", "kind": "rational", "m": 1,
//!   "entries": [[ { "num": [1], "den": [2, -3, 0, 1] } ]] }
//! { "name": "G", "kind": "statespace",
//!   "a": [[-1]], "b": [[1]], "c": [[1]], "d": [[0]] }
//! ```
//!
//! Polynomial coefficients are listed in ascending powers of `s`; matrices
//! are row-major nested arrays.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use sgdom_core::lti::{StateSpace, TransferMatrix};
use sgdom_core::ratpoly::RationalFunction;

#[derive(Debug, Deserialize)]
pub struct Entry {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Rational,
    Statespace,
}

#[derive(Deserialize)]
struct Tag {
    kind: Kind,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalFile {
    #[serde(default)]
    pub name: Option<String>,
    #[allow(dead_code)]
    kind: Kind,
    pub m: usize,
    pub entries: Vec<Vec<Entry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatespaceFile {
    #[serde(default)]
    pub name: Option<String>,
    #[allow(dead_code)]
    kind: Kind,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
    pub d: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub enum SystemFile {
    Rational(RationalFile),
    Statespace(StatespaceFile),
}

#[derive(Debug)]
pub struct ParseError {
    pub source: String,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.source, self.msg)
    }
}

impl std::error::Error for ParseError {}

fn matrix(field: &str, rows: &[Vec<f64>], shape: (usize, usize)) -> Result<DMatrix<f64>, String> {
    if rows.len() != shape.0 {
        return Err(format!(
            "{field}: expected {} rows, found {}",
            shape.0,
            rows.len()
        ));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != shape.1 {
            return Err(format!(
                "{field}[{i}]: expected {} columns, found {}",
                shape.1,
                r.len()
            ));
        }
    }
    Ok(DMatrix::from_fn(shape.0, shape.1, |i, j| rows[i][j]))
}

impl SystemFile {
    pub fn name(&self) -> Option<&str> {
        match self {
            SystemFile::Rational(f) => f.name.as_deref(),
            SystemFile::Statespace(f) => f.name.as_deref(),
        }
    }

    pub fn to_transfer_matrix(&self, tol: f64) -> Result<TransferMatrix, String> {
        let g = match self {
            SystemFile::Rational(RationalFile { m, entries, .. }) => {
                if *m == 0 {
                    return Err("m: dimension must be positive".into());
                }
                if entries.len() != *m {
                    return Err(format!(
                        "entries: expected {m} rows, found {}",
                        entries.len()
                    ));
                }
                let mut flat = Vec::with_capacity(m * m);
                for (i, row) in entries.iter().enumerate() {
                    if row.len() != *m {
                        return Err(format!(
                            "entries[{i}]: expected {m} columns, found {}",
                            row.len()
                        ));
                    }
                    for (j, e) in row.iter().enumerate() {
                        let r = RationalFunction::from_coeffs(&e.num, &e.den, tol)
                            .map_err(|err| format!("entries[{i}][{j}]: {err}"))?;
                        flat.push(r);
                    }
                }
                TransferMatrix::new(*m, flat).map_err(|e| format!("entries: {e}"))?
            }
            SystemFile::Statespace(StatespaceFile { a, b, c, d, .. }) => {
                let n = a.len();
                let m = d.len();
                if m == 0 {
                    return Err("d: dimension must be positive".into());
                }
                let ss = StateSpace::new(
                    matrix("a", a, (n, n))?,
                    matrix("b", b, (n, m))?,
                    matrix("c", c, (m, n))?,
                    matrix("d", d, (m, m))?,
                )
                .map_err(|e| format!("realization: {e}"))?;
                TransferMatrix::from_state_space(ss, tol)
                    .map_err(|e| format!("realization: {e}"))?
            }
        };
        Ok(match self.name() {
            Some(n) => g.with_name(n),
            None => g,
        })
    }
}

pub fn parse_system(text: &str, source: &str, tol: f64) -> Result<TransferMatrix, ParseError> {
    let err = |msg: String| ParseError {
        source: source.to_string(),
        msg,
    };
    // two passes so serde_json reports positions against the concrete layout
    let tag: Tag = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let file = match tag.kind {
        Kind::Rational => {
            SystemFile::Rational(serde_json::from_str(text).map_err(|e| err(e.to_string()))?)
        }
        Kind::Statespace => {
            SystemFile::Statespace(serde_json::from_str(text).map_err(|e| err(e.to_string()))?)
        }
    };
    file.to_transfer_matrix(tol).map_err(err)
}

pub fn load_system(path: &Path, tol: f64) -> Result<TransferMatrix, ParseError> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ParseError {
        source: source.clone(),
        msg: e.to_string(),
    })?;
    parse_system(&text, &source, tol)
}
