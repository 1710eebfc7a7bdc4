//! Square transfer matrices, their poles and the positive-feedback loop.
//!
//! A [`TransferMatrix`] holds reduced rational entries and, optionally, a
//! state-space realization. Pole counting prefers a realization that passes
//! the PBH minimality test and otherwise falls back to a Kalman-reduced
//! realization assembled entry by entry.

mod feedback;
mod poles;
mod statespace;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{CMat, LinalgError};
use crate::ratpoly::{EvalPoint, RatError, RationalFunction, BOUNDARY_TOL, DEFAULT_TOL};

pub use feedback::{
    cancellation_check, closed_loop_dominance_oracle, det_char, well_posed, Assumption,
    FeedbackLoop, OracleOutcome, DET_CHAR_MAX_DIM,
};
pub use poles::{dominance_index, tm_poles, PoleSet};
pub use statespace::{ss_minimality, StateSpace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LtiError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("entry ({row}, {col}) is improper")]
    Improper { row: usize, col: usize },
    #[error("boundary pole at {0}: poles on the imaginary axis are excluded")]
    BoundaryPole(Complex64),
    #[error("realization does not match the rational entries (relative error {0:.3e})")]
    RealizationMismatch(f64),
    #[error("use sampled determinant: dimension {0} exceeds the cofactor expansion budget")]
    DetBudget(usize),
    #[error("assumption failed: {0}")]
    Assumption(Assumption),
    #[error("closed-loop characteristic root on the imaginary axis at {0}")]
    BoundaryClosedLoopRoot(Complex64),
    #[error("det(I - PC) is identically zero")]
    SingularLoop,
    #[error(transparent)]
    Rat(#[from] RatError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Frequency on the extended imaginary axis `s = j omega`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Frequency {
    Finite(f64),
    Infinite,
}

impl Frequency {
    pub fn is_infinite(self) -> bool {
        matches!(self, Frequency::Infinite)
    }

    /// Finite value, or `f64::INFINITY` for the sentinel.
    pub fn value(self) -> f64 {
        match self {
            Frequency::Finite(w) => w,
            Frequency::Infinite => f64::INFINITY,
        }
    }

    pub fn eval_point(self) -> EvalPoint {
        match self {
            Frequency::Finite(w) => EvalPoint::Finite(Complex64::new(0.0, w)),
            Frequency::Infinite => EvalPoint::Infinity,
        }
    }
}

impl From<f64> for Frequency {
    fn from(w: f64) -> Self {
        if w.is_infinite() {
            Frequency::Infinite
        } else {
            Frequency::Finite(w)
        }
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Frequency::Finite(w) => write!(f, "{w}"),
            Frequency::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Frequency {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Frequency::Finite(w) => s.serialize_f64(*w),
            Frequency::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Frequency {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(w) => Ok(Frequency::Finite(w)),
            Raw::Text(t) if t == "inf" => Ok(Frequency::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("bad frequency {t:?}"))),
        }
    }
}

/// Square matrix of proper real-rational functions without imaginary-axis
/// poles.
#[derive(Clone)]
pub struct TransferMatrix {
    m: usize,
    entries: Vec<RationalFunction>,
    realization: Option<StateSpace>,
    name: String,
}

impl TransferMatrix {
    /// `entries` in row-major order.
    pub fn new(m: usize, entries: Vec<RationalFunction>) -> Result<Self, LtiError> {
        if entries.len() != m * m {
            return Err(LtiError::Dimension(format!(
                "{} entries for a {m}x{m} transfer matrix",
                entries.len()
            )));
        }
        for (k, e) in entries.iter().enumerate() {
            if !e.is_proper() {
                return Err(LtiError::Improper {
                    row: k / m,
                    col: k % m,
                });
            }
            if e.den().degree() > Some(0) {
                for r in e.poles(DEFAULT_TOL)?.roots() {
                    if r.value.re.abs() <= BOUNDARY_TOL {
                        return Err(LtiError::BoundaryPole(r.value));
                    }
                }
            }
        }
        Ok(Self {
            m,
            entries,
            realization: None,
            name: String::new(),
        })
    }

    pub fn from_rows(rows: Vec<Vec<RationalFunction>>) -> Result<Self, LtiError> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(LtiError::Dimension(
                "transfer matrix rows must have length m".into(),
            ));
        }
        Self::new(m, rows.into_iter().flatten().collect())
    }

    pub fn scalar(g: RationalFunction) -> Result<Self, LtiError> {
        Self::new(1, vec![g])
    }

    pub fn diag(d: Vec<RationalFunction>) -> Result<Self, LtiError> {
        let m = d.len();
        let mut entries = vec![RationalFunction::zero(); m * m];
        for (i, g) in d.into_iter().enumerate() {
            entries[i * m + i] = g;
        }
        Self::new(m, entries)
    }

    /// Static gain matrix.
    pub fn constant(k: &DMatrix<f64>) -> Result<Self, LtiError> {
        if k.nrows() != k.ncols() {
            return Err(LtiError::Dimension("constant gain must be square".into()));
        }
        let m = k.nrows();
        let entries = (0..m * m)
            .map(|idx| RationalFunction::constant(k[(idx / m, idx % m)]))
            .collect();
        Self::new(m, entries)
    }

    pub fn identity(m: usize) -> Self {
        Self::constant(&DMatrix::identity(m, m)).expect("identity is a valid system")
    }

    pub fn zeros(m: usize) -> Self {
        Self::constant(&DMatrix::zeros(m, m)).expect("zero is a valid system")
    }

    /// Builds the rational entries of `C (sI - A)^{-1} B + D` and keeps the
    /// realization attached.
    pub fn from_state_space(ss: StateSpace, tol: f64) -> Result<Self, LtiError> {
        let entries = ss.transfer_entries(tol)?;
        let tm = Self::new(ss.m(), entries)?;
        tm.with_realization(ss)
    }

    /// Attaches a realization after checking it against the rational entries
    /// at five seeded random points.
    pub fn with_realization(mut self, ss: StateSpace) -> Result<Self, LtiError> {
        if ss.m() != self.m {
            return Err(LtiError::Dimension(format!(
                "realization has {} inputs, transfer matrix is {}x{}",
                ss.m(),
                self.m,
                self.m
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
        let mut checked = 0;
        let mut attempts = 0;
        while checked < 5 && attempts < 100 {
            attempts += 1;
            let s = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-3.0..3.0));
            let (Ok(g), Some(h)) = (self.eval_s(s), ss.eval(s)) else {
                continue;
            };
            let err = (&g - &h).norm();
            let scale = h.norm().max(1.0);
            if err > 1e-6 * scale {
                return Err(LtiError::RealizationMismatch(err / scale));
            }
            checked += 1;
        }
        self.realization = Some(ss);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entry(&self, i: usize, j: usize) -> &RationalFunction {
        &self.entries[i * self.m + j]
    }

    pub fn entries(&self) -> &[RationalFunction] {
        &self.entries
    }

    pub fn realization(&self) -> Option<&StateSpace> {
        self.realization.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn eval_at(&self, s: EvalPoint) -> Result<CMat, LtiError> {
        let m = self.m;
        let mut g = CMat::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                g[(i, j)] = self.entry(i, j).eval_at(s)?;
            }
        }
        Ok(g)
    }

    pub fn eval_s(&self, s: Complex64) -> Result<CMat, LtiError> {
        self.eval_at(EvalPoint::Finite(s))
    }

    /// Frequency response `G(j omega)`; the direct feedthrough at infinity.
    pub fn eval(&self, w: Frequency) -> Result<CMat, LtiError> {
        self.eval_at(w.eval_point())
    }

    /// Entrywise rational product `self * other`, reduced at `tol`.
    pub fn mul(&self, other: &TransferMatrix, tol: f64) -> Result<TransferMatrix, LtiError> {
        if self.m != other.m {
            return Err(LtiError::Dimension(format!(
                "{}x{} times {}x{}",
                self.m, self.m, other.m, other.m
            )));
        }
        let m = self.m;
        let mut entries = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                let mut acc = RationalFunction::zero();
                for k in 0..m {
                    let term = self.entry(i, k).mul(other.entry(k, j), tol)?;
                    if !term.is_zero() {
                        acc = acc.add(&term, tol)?;
                    }
                }
                entries.push(acc);
            }
        }
        TransferMatrix::new(m, entries)
    }

    pub fn neg(&self) -> TransferMatrix {
        self.scale(-1.0)
    }

    pub fn scale(&self, k: f64) -> TransferMatrix {
        TransferMatrix {
            m: self.m,
            entries: self.entries.iter().map(|e| e.scale(k)).collect(),
            realization: self.realization.as_ref().map(|ss| ss.scale_output(k)),
            name: self.name.clone(),
        }
    }
}

impl fmt::Debug for TransferMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransferMatrix")
            .field("name", &self.name)
            .field("m", &self.m)
            .field("entries", &self.entries)
            .field("realization", &self.realization.is_some())
            .finish()
    }
}

/// Frequency response `G(j omega)`.
pub fn tm_eval(g: &TransferMatrix, w: Frequency) -> Result<CMat, LtiError> {
    g.eval(w)
}
