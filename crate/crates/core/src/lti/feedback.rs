use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{tm_poles, Frequency, LtiError, TransferMatrix};
use crate::linalg::{self, CMat};
use crate::ratpoly::{poly_roots, RationalFunction, BOUNDARY_TOL, DEFAULT_TOL};

/// Largest dimension handled by exact cofactor expansion in [`det_char`].
pub const DET_CHAR_MAX_DIM: usize = 6;

/// Standing assumptions of the feedback dominance results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Assumption {
    WellPosedness,
    NoUnstableCancellation,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assumption::WellPosedness => {
                write!(f, "well-posedness (I - P(inf)C(inf) must be invertible)")
            }
            Assumption::NoUnstableCancellation => write!(f, "no unstable pole-zero cancellation"),
        }
    }
}

/// Positive feedback interconnection of `P` and `C`: `u = C y`, `y = P u`
/// plus exogenous inputs. Negative feedback is obtained by negating `C`.
#[derive(Debug, Clone)]
pub struct FeedbackLoop {
    p: TransferMatrix,
    c: TransferMatrix,
}

impl FeedbackLoop {
    pub fn new(p: TransferMatrix, c: TransferMatrix) -> Result<Self, LtiError> {
        if p.m() != c.m() {
            return Err(LtiError::Dimension(format!(
                "P is {}x{} but C is {}x{}",
                p.m(),
                p.m(),
                c.m(),
                c.m()
            )));
        }
        Ok(Self { p, c })
    }

    /// Negative feedback `P # (-C)` expressed in the positive convention.
    pub fn negative(p: TransferMatrix, c: TransferMatrix) -> Result<Self, LtiError> {
        Self::new(p, c.neg())
    }

    pub fn p(&self) -> &TransferMatrix {
        &self.p
    }

    pub fn c(&self) -> &TransferMatrix {
        &self.c
    }

    pub fn m(&self) -> usize {
        self.p.m()
    }

    /// `I - P(s) C(s)` evaluated at `s = j omega`.
    pub fn return_difference(&self, w: Frequency) -> Result<CMat, LtiError> {
        let m = self.m();
        Ok(CMat::identity(m, m) - self.p.eval(w)? * self.c.eval(w)?)
    }
}

/// `|det(I - P(inf) C(inf))| > 1e-12`.
pub fn well_posed(l: &FeedbackLoop) -> bool {
    match l.return_difference(Frequency::Infinite) {
        Ok(m) => linalg::det_abs(&m) > 1e-12,
        Err(_) => false,
    }
}

/// True when `PC` keeps all `p1 + p2` open right-half-plane poles of `P` and
/// `C`.
pub fn cancellation_check(l: &FeedbackLoop, tol: f64) -> Result<bool, LtiError> {
    let p1 = tm_poles(&l.p, tol)?.n_orhp;
    let p2 = tm_poles(&l.c, tol)?.n_orhp;
    let pc = l.p.mul(&l.c, tol)?;
    Ok(tm_poles(&pc, tol)?.n_orhp == p1 + p2)
}

/// `det(I - P C)` by cofactor expansion along rows, memoized over column
/// subsets, with reduction after every arithmetic step.
pub fn det_char(l: &FeedbackLoop) -> Result<RationalFunction, LtiError> {
    let m = l.m();
    if m > DET_CHAR_MAX_DIM {
        return Err(LtiError::DetBudget(m));
    }
    let tol = DEFAULT_TOL;
    let pc = l.p.mul(&l.c, tol)?;
    let mut entries = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let e = pc.entry(i, j).neg();
            entries.push(if i == j {
                e.add(&RationalFunction::one(), tol)?
            } else {
                e
            });
        }
    }
    let mut memo = HashMap::new();
    det_minor(&entries, m, (1u32 << m) - 1, &mut memo, tol)
}

fn det_minor(
    a: &[RationalFunction],
    m: usize,
    cols: u32,
    memo: &mut HashMap<u32, RationalFunction>,
    tol: f64,
) -> Result<RationalFunction, LtiError> {
    if cols == 0 {
        return Ok(RationalFunction::one());
    }
    if let Some(v) = memo.get(&cols) {
        return Ok(v.clone());
    }
    let row = m - cols.count_ones() as usize;
    let mut acc = RationalFunction::zero();
    let mut negative = false;
    for j in 0..m {
        if cols & (1 << j) == 0 {
            continue;
        }
        let e = &a[row * m + j];
        if !e.is_zero() {
            let minor = det_minor(a, m, cols & !(1 << j), memo, tol)?;
            let term = e.mul(&minor, tol)?;
            acc = if negative {
                acc.sub(&term, tol)?
            } else {
                acc.add(&term, tol)?
            };
        }
        negative = !negative;
    }
    memo.insert(cols, acc.clone());
    Ok(acc)
}

/// Closed-loop pole count from `phi = det(I - PC)`.
#[derive(Debug, Clone)]
pub struct OracleOutcome {
    /// Open right-half-plane closed-loop poles.
    pub p: usize,
    pub phi: RationalFunction,
    pub numerator_orhp: usize,
    pub denominator_orhp: usize,
    pub p1: usize,
    pub p2: usize,
}

/// Counts closed-loop poles in the open right half-plane.
///
/// With minimal realizations the closed-loop characteristic polynomial is
/// `phi * a_P * a_C` up to a constant, so the count is the number of open
/// right-half-plane zeros of `phi` plus the `p1 + p2` open-loop poles minus
/// those poles that `phi` still carries. Without cancellation inside the
/// determinant the last two terms cancel and the count is simply the number
/// of unstable numerator roots.
pub fn closed_loop_dominance_oracle(l: &FeedbackLoop) -> Result<OracleOutcome, LtiError> {
    if !well_posed(l) {
        return Err(LtiError::Assumption(Assumption::WellPosedness));
    }
    if !cancellation_check(l, DEFAULT_TOL)? {
        return Err(LtiError::Assumption(Assumption::NoUnstableCancellation));
    }
    let p1 = tm_poles(&l.p, DEFAULT_TOL)?.n_orhp;
    let p2 = tm_poles(&l.c, DEFAULT_TOL)?.n_orhp;
    let phi = det_char(l)?;
    if phi.is_zero() {
        return Err(LtiError::SingularLoop);
    }
    let zeros = if phi.num().degree() > Some(0) {
        poly_roots(phi.num(), DEFAULT_TOL)?
    } else {
        Default::default()
    };
    for r in zeros.roots() {
        if r.value.re.abs() <= BOUNDARY_TOL {
            return Err(LtiError::BoundaryClosedLoopRoot(r.value));
        }
    }
    let numerator_orhp = zeros.count_where(|z| z.re > BOUNDARY_TOL);
    let denominator_orhp = if phi.den().degree() > Some(0) {
        poly_roots(phi.den(), DEFAULT_TOL)?.count_where(|z| z.re > BOUNDARY_TOL)
    } else {
        0
    };
    let p = (numerator_orhp + p1 + p2).saturating_sub(denominator_orhp);
    Ok(OracleOutcome {
        p,
        phi,
        numerator_orhp,
        denominator_orhp,
        p1,
        p2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rf(n: &[f64], d: &[f64]) -> RationalFunction {
        RationalFunction::from_coeffs(n, d, DEFAULT_TOL).unwrap()
    }

    fn siso(n: &[f64], d: &[f64]) -> TransferMatrix {
        TransferMatrix::scalar(rf(n, d)).unwrap()
    }

    fn three_dominant_loop() -> FeedbackLoop {
        FeedbackLoop::new(
            siso(&[1.0], &[2.0, -3.0, 0.0, 1.0]),
            siso(&[2.0, 2.0], &[-2.0, 1.0]),
        )
        .unwrap()
    }

    fn triangular_loop() -> FeedbackLoop {
        let g = TransferMatrix::from_rows(vec![
            vec![rf(&[1.0], &[1.0, 2.0, 1.0]), rf(&[1.0], &[1.0, 1.0])],
            vec![
                RationalFunction::zero(),
                rf(&[0.9], &[-1.0, -1.0, 1.0, 1.0]),
            ],
        ])
        .unwrap();
        FeedbackLoop::new(g, TransferMatrix::identity(2).neg()).unwrap()
    }

    #[test]
    fn well_posedness_cases() {
        assert!(well_posed(&three_dominant_loop()));
        assert!(!well_posed(
            &FeedbackLoop::new(TransferMatrix::identity(2), TransferMatrix::identity(2)).unwrap()
        ));
        assert!(well_posed(&triangular_loop()));
    }

    #[test]
    fn cancellation_cases() {
        assert!(cancellation_check(&three_dominant_loop(), 1e-8).unwrap());
        assert!(cancellation_check(&triangular_loop(), 1e-8).unwrap());
        let bad =
            FeedbackLoop::new(siso(&[1.0], &[-1.0, 1.0]), siso(&[-1.0, 1.0], &[1.0, 1.0])).unwrap();
        assert!(!cancellation_check(&bad, 1e-8).unwrap());
    }

    #[test]
    fn characteristic_numerator_of_two_plus_one_loop() {
        let phi = det_char(&three_dominant_loop()).unwrap();
        let expected = [-6.0, 6.0, -3.0, -2.0, 1.0];
        assert_eq!(phi.num().coeffs().len(), 5);
        for (a, b) in phi.num().coeffs().iter().zip(expected) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn open_loop_determinant_is_one() {
        let l = FeedbackLoop::new(siso(&[1.0], &[1.0, 1.0]), TransferMatrix::zeros(1)).unwrap();
        let phi = det_char(&l).unwrap();
        assert_eq!(phi.num().coeffs(), &[1.0]);
        assert_eq!(phi.den().coeffs(), &[1.0]);
    }

    #[test]
    fn oracle_counts() {
        assert_eq!(
            closed_loop_dominance_oracle(&three_dominant_loop())
                .unwrap()
                .p,
            3
        );
        assert_eq!(
            closed_loop_dominance_oracle(&triangular_loop()).unwrap().p,
            1
        );
        let half = rf(&[0.5], &[1.0, 1.0]);
        let small = FeedbackLoop::new(
            TransferMatrix::diag(vec![half.clone(), half]).unwrap(),
            TransferMatrix::identity(2),
        )
        .unwrap();
        assert_eq!(closed_loop_dominance_oracle(&small).unwrap().p, 0);
    }

    #[test]
    fn oracle_names_failed_assumption() {
        let bad =
            FeedbackLoop::new(siso(&[1.0], &[-1.0, 1.0]), siso(&[-1.0, 1.0], &[1.0, 1.0])).unwrap();
        let err = closed_loop_dominance_oracle(&bad).unwrap_err();
        assert_eq!(
            err,
            LtiError::Assumption(Assumption::NoUnstableCancellation)
        );
        assert!(err
            .to_string()
            .contains("no unstable pole-zero cancellation"));
        let ill =
            FeedbackLoop::new(TransferMatrix::identity(1), TransferMatrix::identity(1)).unwrap();
        assert_eq!(
            closed_loop_dominance_oracle(&ill).unwrap_err(),
            LtiError::Assumption(Assumption::WellPosedness)
        );
    }

    #[test]
    fn budget_exceeded() {
        let l = FeedbackLoop::new(TransferMatrix::zeros(7), TransferMatrix::zeros(7)).unwrap();
        assert_eq!(det_char(&l).unwrap_err(), LtiError::DetBudget(7));
    }
}
