use std::fmt;

use num_complex::Complex64;

use super::{poly_roots, Polynomial, RatError, RootMultiset};

/// Point of the extended complex plane at which a rational function is
/// evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvalPoint {
    Finite(Complex64),
    Infinity,
}

impl From<Complex64> for EvalPoint {
    fn from(s: Complex64) -> Self {
        EvalPoint::Finite(s)
    }
}

/// `num / den` with a monic denominator and no approximate common roots.
#[derive(Clone, PartialEq)]
pub struct RationalFunction {
    num: Polynomial,
    den: Polynomial,
}

impl RationalFunction {
    /// Reduces `num / den` with [`rat_reduce`].
    pub fn new(num: Polynomial, den: Polynomial, tol: f64) -> Result<Self, RatError> {
        rat_reduce(&num, &den, tol)
    }

    pub fn from_coeffs(num: &[f64], den: &[f64], tol: f64) -> Result<Self, RatError> {
        Self::new(
            Polynomial::new(num.to_vec()),
            Polynomial::new(den.to_vec()),
            tol,
        )
    }

    pub fn constant(c: f64) -> Self {
        Self {
            num: Polynomial::constant(c),
            den: Polynomial::one(),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn num(&self) -> &Polynomial {
        &self.num
    }

    pub fn den(&self) -> &Polynomial {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `deg(num) <= deg(den)`; the zero function is proper.
    pub fn is_proper(&self) -> bool {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => true,
            (Some(n), Some(d)) => n <= d,
            (Some(_), None) => false,
        }
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64, RatError> {
        rat_eval(self, EvalPoint::Finite(s))
    }

    pub fn eval_at(&self, s: EvalPoint) -> Result<Complex64, RatError> {
        rat_eval(self, s)
    }

    pub fn poles(&self, tol: f64) -> Result<RootMultiset, RatError> {
        poly_roots(&self.den, tol)
    }

    /// Roots of the numerator. The zero function has no finite zero set.
    pub fn zeros(&self, tol: f64) -> Result<RootMultiset, RatError> {
        poly_roots(&self.num, tol)
    }

    pub fn add(&self, other: &Self, tol: f64) -> Result<Self, RatError> {
        if self.den == other.den {
            return rat_reduce(&(&self.num + &other.num), &self.den, tol);
        }
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        rat_reduce(&num, &(&self.den * &other.den), tol)
    }

    pub fn sub(&self, other: &Self, tol: f64) -> Result<Self, RatError> {
        self.add(&other.neg(), tol)
    }

    pub fn mul(&self, other: &Self, tol: f64) -> Result<Self, RatError> {
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero());
        }
        rat_reduce(&(&self.num * &other.num), &(&self.den * &other.den), tol)
    }

    pub fn neg(&self) -> Self {
        Self {
            num: -&self.num,
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, k: f64) -> Self {
        if k == 0.0 {
            return Self::zero();
        }
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }
}

impl Default for RationalFunction {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}) / ({:?})", self.num.coeffs(), self.den.coeffs())
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Cancels approximate common roots of `num` and `den`.
///
/// A numerator root within `tol * max(1, |r|)` of a denominator root is
/// cancelled once per shared multiplicity. The result has a monic
/// denominator. When nothing cancels the coefficients are only rescaled, so
/// exact inputs stay exact.
pub fn rat_reduce(
    num: &Polynomial,
    den: &Polynomial,
    tol: f64,
) -> Result<RationalFunction, RatError> {
    if den.is_zero() {
        return Err(RatError::ZeroDenominator);
    }
    if num.is_zero() {
        return Ok(RationalFunction::zero());
    }
    let (mut num, mut den) = (num.clone(), den.clone());
    if num.degree() > Some(0) && den.degree() > Some(0) {
        let nr = poly_roots(&num, tol)?;
        let dr = poly_roots(&den, tol)?;
        let mut den_left: Vec<usize> = dr.roots().iter().map(|r| r.multiplicity).collect();
        let mut cut_num = Vec::new();
        let mut cut_den = Vec::new();
        for a in nr.roots() {
            let mut need = a.multiplicity;
            while need > 0 {
                let scale = 1.0f64.max(a.value.norm());
                let best = dr
                    .roots()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| den_left[*j] > 0)
                    .map(|(j, b)| (j, (a.value - b.value).norm()))
                    .filter(|(_, d)| *d <= tol * scale)
                    .min_by(|x, y| x.1.total_cmp(&y.1));
                let Some((j, _)) = best else { break };
                let k = need.min(den_left[j]);
                den_left[j] -= k;
                need -= k;
                for _ in 0..k {
                    cut_num.push(a.value);
                    cut_den.push(dr.roots()[j].value);
                }
            }
        }
        if !cut_num.is_empty() {
            num = num.deflate(&cut_num);
            den = den.deflate(&cut_den);
        }
    }
    let lead = den.leading();
    Ok(RationalFunction {
        num: num.scale(1.0 / lead),
        den: den.scale(1.0 / lead),
    })
}

/// Evaluates `r` by Horner's rule. At infinity the value is the ratio of
/// leading coefficients (equal degrees) or 0 (strictly proper).
pub fn rat_eval(r: &RationalFunction, s: EvalPoint) -> Result<Complex64, RatError> {
    match s {
        EvalPoint::Infinity => {
            let Some(n) = r.num.degree() else {
                return Ok(Complex64::new(0.0, 0.0));
            };
            let d = r.den.degree().unwrap_or(0);
            match n.cmp(&d) {
                std::cmp::Ordering::Less => Ok(Complex64::new(0.0, 0.0)),
                std::cmp::Ordering::Equal => {
                    Ok(Complex64::new(r.num.leading() / r.den.leading(), 0.0))
                }
                std::cmp::Ordering::Greater => Err(RatError::Improper),
            }
        }
        EvalPoint::Finite(s) => {
            let d = r.den.eval(s);
            if d.norm() <= 1e3 * f64::EPSILON * r.den.eval_abs(s.norm()) {
                return Err(RatError::EvaluationAtPole(s));
            }
            Ok(r.num.eval(s) / d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::complex_from_roots;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exact_common_factor_cancels() {
        // (s - 1) / ((s - 1)(s + 2))
        let r = RationalFunction::from_coeffs(&[-1.0, 1.0], &[-2.0, 1.0, 1.0], 1e-8).unwrap();
        assert_eq!(r.num().degree(), Some(0));
        assert!((r.num().coeffs()[0] - 1.0).abs() < 1e-12);
        assert!((r.den().coeffs()[0] - 2.0).abs() < 1e-12);
        assert!((r.den().coeffs()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coprime_pair_is_unchanged() {
        let r = RationalFunction::from_coeffs(&[-2.0, 1.0], &[3.0, 1.0], 1e-8).unwrap();
        assert_eq!(r.num().coeffs(), &[-2.0, 1.0]);
        assert_eq!(r.den().coeffs(), &[3.0, 1.0]);
    }

    #[test]
    fn near_common_factor_cancels_within_tolerance() {
        let num = Polynomial::from_roots(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let den = Polynomial::from_roots(&[c(1.0000000001, 0.0), c(-5.0, 0.0)]);
        let r = rat_reduce(&num, &den, 1e-6).unwrap();
        assert_eq!(r.num().degree(), Some(1));
        assert_eq!(r.den().degree(), Some(1));
        let mut rng_state = 7u64;
        for _ in 0..10 {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let re = ((rng_state >> 11) as f64 / (1u64 << 53) as f64) * 6.0 - 3.0;
            let s = c(re, 0.7);
            let reference = (s + 1.0) / (s + 5.0);
            assert!((r.eval(s).unwrap() - reference).norm() <= 1e-8 * reference.norm());
        }
    }

    #[test]
    fn multiple_roots_cancel_by_shared_multiplicity() {
        // (s - 1)^2 (s + 3) / ((s - 1)^3 (s + 4))
        let num = Polynomial::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(-3.0, 0.0)]);
        let den = Polynomial::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-4.0, 0.0)]);
        let r = rat_reduce(&num, &den, 1e-8).unwrap();
        assert_eq!(r.num().degree(), Some(1));
        assert_eq!(r.den().degree(), Some(2));
        let s = c(0.3, 2.0);
        let reference = (s + 3.0) / ((s - 1.0) * (s + 4.0));
        assert!((r.eval(s).unwrap() - reference).norm() < 1e-9);
    }

    #[test]
    fn complex_pair_cancels() {
        let pair = [c(-1.0, 2.0), c(-1.0, -2.0)];
        let num = Polynomial::from_roots(&[pair[0], pair[1], c(3.0, 0.0)]);
        let den = Polynomial::from_roots(&[pair[0], pair[1], c(-2.0, 0.0), c(-6.0, 0.0)]);
        let r = rat_reduce(&num, &den, 1e-8).unwrap();
        assert_eq!(r.num().degree(), Some(1));
        assert_eq!(r.den().degree(), Some(2));
        let s = c(0.5, 1.5);
        let reference = (s - 3.0) / ((s + 2.0) * (s + 6.0));
        assert!((r.eval(s).unwrap() - reference).norm() < 1e-10);
    }

    #[test]
    fn unstable_first_order_values() {
        let r = RationalFunction::from_coeffs(&[1.0], &[1.0, -1.0], 1e-8).unwrap();
        assert!((r.eval(c(0.0, 0.0)).unwrap() - c(1.0, 0.0)).norm() < 1e-15);
        assert!((r.eval(c(0.0, 1.0)).unwrap() - c(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn value_at_infinity() {
        let r = RationalFunction::from_coeffs(&[2.0, 2.0], &[-2.0, 1.0], 1e-8).unwrap();
        assert_eq!(rat_eval(&r, EvalPoint::Infinity).unwrap(), c(2.0, 0.0));
        let sp = RationalFunction::from_coeffs(&[1.0], &[1.0, 1.0], 1e-8).unwrap();
        assert_eq!(rat_eval(&sp, EvalPoint::Infinity).unwrap(), c(0.0, 0.0));
        let improper = RationalFunction::from_coeffs(&[0.0, 0.0, 1.0], &[1.0, 1.0], 1e-8).unwrap();
        assert_eq!(
            rat_eval(&improper, EvalPoint::Infinity),
            Err(RatError::Improper)
        );
    }

    #[test]
    fn evaluation_at_pole_is_an_error() {
        let r = RationalFunction::from_coeffs(&[1.0], &[-2.0, 1.0], 1e-8).unwrap();
        assert!(matches!(
            r.eval(c(2.0, 0.0)),
            Err(RatError::EvaluationAtPole(_))
        ));
    }

    #[test]
    fn zero_denominator_rejected() {
        assert_eq!(
            RationalFunction::from_coeffs(&[1.0], &[0.0], 1e-8),
            Err(RatError::ZeroDenominator)
        );
    }

    #[test]
    fn arithmetic_matches_pointwise() {
        let a = RationalFunction::from_coeffs(&[1.0], &[2.0, -3.0, 0.0, 1.0], 1e-8).unwrap();
        let b = RationalFunction::from_coeffs(&[2.0, 2.0], &[-2.0, 1.0], 1e-8).unwrap();
        let s = c(0.4, -1.3);
        let (va, vb) = (a.eval(s).unwrap(), b.eval(s).unwrap());
        let close = |x: Complex64, y: Complex64| (x - y).norm() <= 1e-12 * (1.0 + y.norm());
        assert!(close(a.add(&b, 1e-8).unwrap().eval(s).unwrap(), va + vb));
        assert!(close(a.sub(&b, 1e-8).unwrap().eval(s).unwrap(), va - vb));
        assert!(close(a.mul(&b, 1e-8).unwrap().eval(s).unwrap(), va * vb));
        // 1 - PC for the two-plus-one dominant loop
        let phi = RationalFunction::one()
            .sub(&a.mul(&b, 1e-8).unwrap(), 1e-8)
            .unwrap();
        assert_eq!(phi.num().coeffs(), &[-6.0, 6.0, -3.0, -2.0, 1.0]);
    }

    #[test]
    fn complex_expansion_helper() {
        let p = complex_from_roots(&[c(0.0, 1.0), c(0.0, -1.0)]);
        assert!((p[0] - c(1.0, 0.0)).norm() < 1e-15 && p[1].norm() < 1e-15);
    }
}
